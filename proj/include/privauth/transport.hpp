#ifndef PRIVAUTH_TRANSPORT_HPP
#define PRIVAUTH_TRANSPORT_HPP

#include <deque>

#include "privauth/bytes.hpp"
#include "privauth/errors.hpp"

namespace privauth {

// Client-side view of one connection to a server. send() carries a framed
// message toward the server; receive() returns the next server frame.
class Transport {
public:
    virtual ~Transport() = default;
    virtual void send(const Bytes& frame) = 0;
    virtual Bytes receive() = 0;
};

namespace transport_detail {

// Direction-tagged concatenation of every frame, in order. Byte-identical
// across runs whenever the protocol above it is deterministic.
inline void record(Bytes& transcript, std::uint8_t direction,
                   const Bytes& frame) {
    transcript.push_back(direction);
    std::uint8_t len[4];
    store_be32(len, static_cast<std::uint32_t>(frame.size()));
    transcript.insert(transcript.end(), len, len + 4);
    append(transcript, frame);
}

} // namespace transport_detail

constexpr std::uint8_t kToServer = 0x00;
constexpr std::uint8_t kToClient = 0x01;

// Synchronous in-process link: each sent frame is handed to the server
// immediately and replies are queued for receive().
template <typename ServerT>
class LoopbackTransport final : public Transport {
public:
    explicit LoopbackTransport(ServerT& server)
        : server_(server), connection_(server.connect()) {}

    void send(const Bytes& frame) override {
        transport_detail::record(transcript_, kToServer, frame);
        to_server_.push_back(frame);
        for (const Bytes& reply : server_.handle(connection_, frame)) {
            transport_detail::record(transcript_, kToClient, reply);
            to_client_.push_back(reply);
            inbox_.push_back(reply);
        }
    }

    Bytes receive() override {
        if (inbox_.empty()) {
            throw TransportError("loopback: no pending reply");
        }
        Bytes frame = inbox_.front();
        inbox_.pop_front();
        return frame;
    }

    const Bytes& transcript() const { return transcript_; }
    const std::deque<Bytes>& frames_to_server() const { return to_server_; }
    const std::deque<Bytes>& frames_to_client() const { return to_client_; }

private:
    ServerT& server_;
    typename ServerT::Connection connection_;
    std::deque<Bytes> inbox_;
    std::deque<Bytes> to_server_;
    std::deque<Bytes> to_client_;
    Bytes transcript_;
};

} // namespace privauth

#endif // PRIVAUTH_TRANSPORT_HPP
