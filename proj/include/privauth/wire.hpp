#ifndef PRIVAUTH_WIRE_HPP
#define PRIVAUTH_WIRE_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "privauth/bytes.hpp"
#include "privauth/errors.hpp"
#include "privauth/fixed_point.hpp"
#include "privauth/risk.hpp"

namespace privauth::wire {

enum class MessageKind : std::uint8_t {
    ServerPubKey = 1,
    BlindedOprfInput = 2,
    OprfEvaluation = 3,
    SessionRequest = 4,
    BlindTokenReply = 5,
    TokenPresentation = 6,
    PrivateFeatures = 7,
    RiskReply = 8,
    // Control frame carrying a rejection reason; not part of the sized
    // protocol payloads above.
    Reject = 9,
};

enum class RejectReason : std::uint32_t {
    Malformed = 1,
    CredentialCheckFailed = 2,
    TokenInvalid = 3,
    Replay = 4,
    Protocol = 5,
};

constexpr std::size_t kElementBytes = 32;
constexpr std::size_t kFrameHeaderBytes = 5;

struct Message {
    MessageKind kind;
    Bytes payload;

    bool operator==(const Message&) const = default;
};

namespace detail {

inline void check_payload(MessageKind kind, std::size_t size) {
    switch (kind) {
        case MessageKind::ServerPubKey:
        case MessageKind::BlindedOprfInput:
        case MessageKind::OprfEvaluation:
        case MessageKind::BlindTokenReply:
            if (size != kElementBytes) {
                throw WireError("wire: payload must be one 32-byte element");
            }
            return;
        case MessageKind::SessionRequest:
        case MessageKind::TokenPresentation:
            if (size != 3 * kElementBytes) {
                throw WireError("wire: payload must be three 32-byte elements");
            }
            return;
        case MessageKind::PrivateFeatures:
            if (size == 0 || size % (2 * fixed_point::kValueBytes) != 0) {
                throw WireError("wire: features payload must be 2*32*n_f bytes");
            }
            return;
        case MessageKind::RiskReply:
            if (size != 8) {
                throw WireError("wire: risk reply payload must be 8 bytes");
            }
            return;
        case MessageKind::Reject:
            if (size != 4) {
                throw WireError("wire: reject payload must be 4 bytes");
            }
            return;
    }
    throw WireError("wire: unknown message kind");
}

} // namespace detail

// Frame layout: 1-byte kind tag, 4-byte big-endian payload length, payload.
inline Bytes encode(const Message& msg) {
    detail::check_payload(msg.kind, msg.payload.size());
    Bytes frame;
    frame.reserve(kFrameHeaderBytes + msg.payload.size());
    frame.push_back(static_cast<std::uint8_t>(msg.kind));
    std::uint8_t len[4];
    store_be32(len, static_cast<std::uint32_t>(msg.payload.size()));
    frame.insert(frame.end(), len, len + 4);
    append(frame, msg.payload);
    return frame;
}

inline Message decode(ByteView frame) {
    if (frame.size() < kFrameHeaderBytes) {
        throw WireError("wire: truncated frame header");
    }
    const std::uint8_t tag = frame[0];
    if (tag < static_cast<std::uint8_t>(MessageKind::ServerPubKey) ||
        tag > static_cast<std::uint8_t>(MessageKind::Reject)) {
        throw WireError("wire: unknown kind tag");
    }
    const auto kind = static_cast<MessageKind>(tag);
    const std::uint32_t length = load_be32(frame.data() + 1);
    if (frame.size() != kFrameHeaderBytes + length) {
        throw WireError("wire: frame length mismatch");
    }
    detail::check_payload(kind, length);
    return {kind, Bytes(frame.begin() + kFrameHeaderBytes, frame.end())};
}

// Single-element messages.
inline Message make_element_message(MessageKind kind, const Bytes& element) {
    return {kind, element};
}

inline Message make_three_element_message(MessageKind kind, const Bytes& a,
                                          const Bytes& b, const Bytes& c) {
    return {kind, concat(a, concat(b, c))};
}

inline std::array<Bytes, 3> split_three_elements(const Message& msg) {
    if (msg.payload.size() != 3 * kElementBytes) {
        throw WireError("wire: expected three elements");
    }
    std::array<Bytes, 3> out;
    for (std::size_t i = 0; i < 3; ++i) {
        out[i] = Bytes(msg.payload.begin() + static_cast<long>(i * kElementBytes),
                       msg.payload.begin() + static_cast<long>((i + 1) * kElementBytes));
    }
    return out;
}

// Feature vectors travel as consecutive 256-bit fixed-point values.
inline Bytes encode_features(const std::vector<double>& values) {
    Bytes out;
    out.reserve(values.size() * fixed_point::kValueBytes);
    for (const double v : values) {
        const auto enc = fixed_point::encode(v);
        out.insert(out.end(), enc.begin(), enc.end());
    }
    return out;
}

inline std::vector<double> decode_features(ByteView payload) {
    if (payload.size() % fixed_point::kValueBytes != 0) {
        throw WireError("wire: features payload not a multiple of 32 bytes");
    }
    std::vector<double> out;
    out.reserve(payload.size() / fixed_point::kValueBytes);
    for (std::size_t off = 0; off < payload.size();
         off += fixed_point::kValueBytes) {
        out.push_back(fixed_point::decode(
            fixed_point::from_bytes(payload.subspan(off, fixed_point::kValueBytes))));
    }
    return out;
}

// The PrivateFeatures payload carries the noised profile vector followed by
// the noised live vector, n_f values each.
inline Message make_private_features(const std::vector<double>& profile,
                                     const std::vector<double>& live) {
    if (profile.empty() || profile.size() != live.size()) {
        throw WireError("wire: profile/live vectors must match and be nonempty");
    }
    return {MessageKind::PrivateFeatures,
            concat(encode_features(profile), encode_features(live))};
}

inline std::pair<std::vector<double>, std::vector<double>>
split_private_features(const Message& msg) {
    if (msg.kind != MessageKind::PrivateFeatures) {
        throw WireError("wire: not a features message");
    }
    detail::check_payload(msg.kind, msg.payload.size());
    const std::size_t half = msg.payload.size() / 2;
    const ByteView payload(msg.payload);
    return {decode_features(payload.subspan(0, half)),
            decode_features(payload.subspan(half))};
}

struct RiskReplyData {
    double score;
    AuthRequirement adjustment;
};

// 4-byte unsigned fixed-point score (2^32 - 1 encodes 1.0) plus the 4-byte
// adjustment level.
inline Message make_risk_reply(const RiskReplyData& data) {
    if (!(data.score >= 0.0 && data.score <= 1.0)) {
        throw WireError("wire: risk score must lie in [0,1]");
    }
    Bytes payload(8);
    const auto fixed = static_cast<std::uint32_t>(
        std::llround(data.score * 4294967295.0));
    store_be32(payload.data(), fixed);
    store_be32(payload.data() + 4, static_cast<std::uint32_t>(data.adjustment));
    return {MessageKind::RiskReply, payload};
}

inline RiskReplyData parse_risk_reply(const Message& msg) {
    if (msg.kind != MessageKind::RiskReply || msg.payload.size() != 8) {
        throw WireError("wire: not a risk reply");
    }
    const std::uint32_t fixed = load_be32(msg.payload.data());
    const std::uint32_t level = load_be32(msg.payload.data() + 4);
    if (level > static_cast<std::uint32_t>(AuthRequirement::Advanced)) {
        throw WireError("wire: unknown adjustment level");
    }
    return {static_cast<double>(fixed) / 4294967295.0,
            static_cast<AuthRequirement>(level)};
}

inline Message make_reject(RejectReason reason) {
    Bytes payload(4);
    store_be32(payload.data(), static_cast<std::uint32_t>(reason));
    return {MessageKind::Reject, payload};
}

inline RejectReason parse_reject(const Message& msg) {
    if (msg.kind != MessageKind::Reject || msg.payload.size() != 4) {
        throw WireError("wire: not a reject frame");
    }
    const std::uint32_t code = load_be32(msg.payload.data());
    if (code < static_cast<std::uint32_t>(RejectReason::Malformed) ||
        code > static_cast<std::uint32_t>(RejectReason::Protocol)) {
        throw WireError("wire: unknown reject reason");
    }
    return static_cast<RejectReason>(code);
}

} // namespace privauth::wire

#endif // PRIVAUTH_WIRE_HPP
