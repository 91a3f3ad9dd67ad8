#ifndef PRIVAUTH_VAULT_HPP
#define PRIVAUTH_VAULT_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <sodium.h>

#include "privauth/bytes.hpp"
#include "privauth/errors.hpp"
#include "privauth/fixed_point.hpp"
#include "privauth/group.hpp"
#include "privauth/privacy.hpp"
#include "privauth/rng.hpp"

namespace privauth::vault {

constexpr std::size_t kKeyBytes = crypto_aead_xchacha20poly1305_ietf_KEYBYTES;
constexpr std::size_t kNonceBytes = crypto_aead_xchacha20poly1305_ietf_NPUBBYTES;
constexpr std::size_t kTagBytes = crypto_aead_xchacha20poly1305_ietf_ABYTES;
constexpr std::size_t kCidBytes = 32;

using SymmetricKey = std::array<std::uint8_t, kKeyBytes>;
using ContentId = std::array<std::uint8_t, kCidBytes>;

inline SymmetricKey generate_key(Rng& rng) {
    SymmetricKey key;
    rng.fill(key.data(), key.size());
    return key;
}

struct ProfileCiphertext {
    Bytes nonce;
    Bytes tag;
    Bytes body;

    bool operator==(const ProfileCiphertext&) const = default;

    // Canonical serialization: nonce, tag, then the variable-length body.
    Bytes encoding() const {
        return concat(nonce, concat(tag, body));
    }

    static ProfileCiphertext from_encoding(ByteView bytes) {
        if (bytes.size() < kNonceBytes + kTagBytes) {
            throw DecodeError("vault: ciphertext encoding too short");
        }
        ProfileCiphertext ct;
        ct.nonce = Bytes(bytes.begin(), bytes.begin() + kNonceBytes);
        ct.tag = Bytes(bytes.begin() + kNonceBytes,
                       bytes.begin() + kNonceBytes + kTagBytes);
        ct.body = Bytes(bytes.begin() + kNonceBytes + kTagBytes, bytes.end());
        return ct;
    }
};

// Plaintext layout: feature count, then (value, lo, hi) per feature as
// 256-bit fixed point.
inline Bytes serialize_profile(const FeatureVector& features) {
    features.validate();
    Bytes out(4);
    store_be32(out.data(), static_cast<std::uint32_t>(features.size()));
    for (std::size_t i = 0; i < features.size(); ++i) {
        for (const double v : {features.values[i], features.bounds[i].lo,
                               features.bounds[i].hi}) {
            const auto enc = fixed_point::encode(v);
            out.insert(out.end(), enc.begin(), enc.end());
        }
    }
    return out;
}

inline FeatureVector parse_profile(ByteView bytes) {
    if (bytes.size() < 4) {
        throw DecodeError("vault: profile too short");
    }
    const std::uint32_t n = load_be32(bytes.data());
    if (n == 0 || bytes.size() != 4 + std::size_t{n} * 3 * fixed_point::kValueBytes) {
        throw DecodeError("vault: profile length mismatch");
    }
    FeatureVector out;
    std::size_t off = 4;
    for (std::uint32_t i = 0; i < n; ++i) {
        double triple[3];
        for (double& slot : triple) {
            slot = fixed_point::decode(fixed_point::from_bytes(
                bytes.subspan(off, fixed_point::kValueBytes)));
            off += fixed_point::kValueBytes;
        }
        out.values.push_back(triple[0]);
        out.bounds.push_back({triple[1], triple[2]});
    }
    return out;
}

inline ProfileCiphertext encrypt_profile(const SymmetricKey& key,
                                         const FeatureVector& features,
                                         Rng& rng) {
    const Bytes plaintext = serialize_profile(features);
    ProfileCiphertext ct;
    ct.nonce = rng.bytes(kNonceBytes);
    ct.tag.resize(kTagBytes);
    ct.body.resize(plaintext.size());
    unsigned long long tag_len = 0;
    crypto_aead_xchacha20poly1305_ietf_encrypt_detached(
        ct.body.data(), ct.tag.data(), &tag_len, plaintext.data(),
        plaintext.size(), nullptr, 0, nullptr, ct.nonce.data(), key.data());
    return ct;
}

inline FeatureVector decrypt_profile(const SymmetricKey& key,
                                     const ProfileCiphertext& ct) {
    if (ct.nonce.size() != kNonceBytes || ct.tag.size() != kTagBytes) {
        throw DecodeError("vault: malformed ciphertext");
    }
    Bytes plaintext(ct.body.size());
    if (crypto_aead_xchacha20poly1305_ietf_decrypt_detached(
            plaintext.data(), nullptr, ct.body.data(), ct.body.size(),
            ct.tag.data(), nullptr, 0, ct.nonce.data(), key.data()) != 0) {
        throw DecryptError("vault: ciphertext authentication failed");
    }
    return parse_profile(plaintext);
}

inline ContentId content_id(const ProfileCiphertext& ct) {
    const Bytes encoding = ct.encoding();
    ContentId cid;
    crypto_generichash(cid.data(), cid.size(), encoding.data(), encoding.size(),
                       nullptr, 0);
    return cid;
}

// Content-addressed blob store. put is idempotent; get of an unknown cid is
// a not-found error.
class ContentStore {
public:
    virtual ~ContentStore() = default;
    virtual ContentId put(const ProfileCiphertext& ct) = 0;
    virtual ProfileCiphertext get(const ContentId& cid) const = 0;
};

class MemoryContentStore final : public ContentStore {
public:
    ContentId put(const ProfileCiphertext& ct) override {
        const ContentId cid = content_id(ct);
        blobs_[to_hex(cid)] = ct.encoding();
        return cid;
    }

    ProfileCiphertext get(const ContentId& cid) const override {
        const auto it = blobs_.find(to_hex(cid));
        if (it == blobs_.end()) {
            throw NotFoundError("store: unknown content id");
        }
        return ProfileCiphertext::from_encoding(it->second);
    }

    std::size_t size() const { return blobs_.size(); }

    // Raw view for confidentiality scans in tests.
    const std::unordered_map<std::string, Bytes>& blobs() const {
        return blobs_;
    }

private:
    std::unordered_map<std::string, Bytes> blobs_;
};

// One file per blob, named by the hex digest.
class FileContentStore final : public ContentStore {
public:
    explicit FileContentStore(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    ContentId put(const ProfileCiphertext& ct) override {
        const ContentId cid = content_id(ct);
        const auto path = dir_ / to_hex(cid);
        if (!std::filesystem::exists(path)) {
            std::ofstream out(path, std::ios::binary | std::ios::trunc);
            const Bytes encoding = ct.encoding();
            out.write(reinterpret_cast<const char*>(encoding.data()),
                      static_cast<std::streamsize>(encoding.size()));
            if (!out) {
                throw Error("store: failed to write blob");
            }
        }
        return cid;
    }

    ProfileCiphertext get(const ContentId& cid) const override {
        const auto path = dir_ / to_hex(cid);
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw NotFoundError("store: unknown content id");
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        const std::string data = buf.str();
        return ProfileCiphertext::from_encoding(to_bytes(data));
    }

private:
    std::filesystem::path dir_;
};

// Schnorr signatures over the protocol group; this is where the client
// keypair (a, A) earns its keep.
template <PrimeOrderGroup G>
struct SigningKey {
    typename G::Scalar secret;
    typename G::Element pub;
};

template <PrimeOrderGroup G>
SigningKey<G> signing_keygen(Rng& rng) {
    SigningKey<G> key;
    key.secret = G::random_scalar(rng);
    key.pub = G::exp(G::generator(), key.secret);
    return key;
}

namespace detail {

template <PrimeOrderGroup G>
typename G::Scalar challenge(const typename G::Element& commitment,
                             const typename G::Element& pub, ByteView message) {
    Bytes input = G::encode(commitment);
    append(input, G::encode(pub));
    append(input, Bytes(message.begin(), message.end()));
    return G::hash_to_scalar(input);
}

} // namespace detail

// Derandomized nonce: k is a hash of the secret and the message, so signing
// needs no ambient randomness and never reuses k across messages.
template <PrimeOrderGroup G>
Bytes sign(const SigningKey<G>& key, ByteView message) {
    typename G::Scalar k{};
    for (std::uint64_t ctr = 0;; ++ctr) {
        Bytes input{0x6e};
        std::uint8_t ctr_bytes[8];
        store_le64(ctr_bytes, ctr);
        input.insert(input.end(), ctr_bytes, ctr_bytes + 8);
        append(input, G::encode_scalar(key.secret));
        append(input, Bytes(message.begin(), message.end()));
        k = G::hash_to_scalar(input);
        if (k != typename G::Scalar{}) break;
    }
    const auto commitment = G::exp(G::generator(), k);
    const auto c = detail::challenge<G>(commitment, key.pub, message);
    const auto s = G::scalar_add(k, G::scalar_mul(c, key.secret));
    return concat(G::encode(commitment), G::encode_scalar(s));
}

template <PrimeOrderGroup G>
bool verify_signature(const typename G::Element& pub, ByteView message,
                      ByteView signature) {
    if (signature.size() != G::kElementBytes + G::kScalarBytes) {
        return false;
    }
    try {
        const auto commitment = G::decode(signature.subspan(0, G::kElementBytes));
        const auto s = G::decode_scalar(signature.subspan(G::kElementBytes));
        const auto c = detail::challenge<G>(commitment, pub, message);
        return G::exp(G::generator(), s) == G::mul(commitment, G::exp(pub, c));
    } catch (const DecodeError&) {
        return false;
    }
}

template <PrimeOrderGroup G>
struct RegistryEntry {
    typename G::Element owner;
    ContentId cid;
    std::uint64_t counter;
    Bytes signature;

    bool operator==(const RegistryEntry&) const = default;

    Bytes signed_message() const {
        Bytes msg = G::encode(owner);
        msg.insert(msg.end(), cid.begin(), cid.end());
        std::uint8_t ctr[8];
        store_be64(ctr, counter);
        msg.insert(msg.end(), ctr, ctr + 8);
        return msg;
    }
};

// Signed owner -> latest-cid mapping with rollback protection. Optionally
// backed by an append-only journal file, one hex-encoded entry per line.
template <PrimeOrderGroup G>
class Registry {
public:
    Registry() = default;

    explicit Registry(std::filesystem::path journal)
        : journal_(std::move(journal)) {
        load_journal();
    }

    // Validates and records an externally built entry. Rejections: forged or
    // corrupted signatures, and counters that do not advance.
    void apply(const RegistryEntry<G>& entry) {
        if (!verify_signature<G>(entry.owner, entry.signed_message(),
                                 entry.signature)) {
            throw AuthRejectedError("registry: signature rejected");
        }
        const std::string key = to_hex(G::encode(entry.owner));
        const auto it = latest_.find(key);
        if (it != latest_.end() && entry.counter <= it->second.counter) {
            throw ReplayError("registry: counter must strictly increase");
        }
        latest_.insert_or_assign(key, entry);
        if (journal_) {
            append_journal(entry);
        }
    }

    // Builds, signs, and records the next entry for this owner.
    RegistryEntry<G> update(const SigningKey<G>& owner_key, const ContentId& cid) {
        RegistryEntry<G> entry;
        entry.owner = owner_key.pub;
        entry.cid = cid;
        entry.counter = next_counter(owner_key.pub);
        entry.signature = sign<G>(owner_key, entry.signed_message());
        apply(entry);
        return entry;
    }

    std::optional<RegistryEntry<G>> latest(const typename G::Element& owner) const {
        const auto it = latest_.find(to_hex(G::encode(owner)));
        if (it == latest_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    std::uint64_t next_counter(const typename G::Element& owner) const {
        const auto it = latest_.find(to_hex(G::encode(owner)));
        return it == latest_.end() ? 1 : it->second.counter + 1;
    }

    std::size_t owner_count() const { return latest_.size(); }

private:
    void append_journal(const RegistryEntry<G>& entry) {
        std::ofstream out(*journal_, std::ios::app);
        out << to_hex(G::encode(entry.owner)) << ' ' << to_hex(entry.cid) << ' '
            << entry.counter << ' ' << to_hex(entry.signature) << '\n';
        if (!out) {
            throw Error("registry: failed to append journal");
        }
    }

    void load_journal() {
        std::ifstream in(*journal_);
        if (!in) {
            return;
        }
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::istringstream fields(line);
            std::string owner_hex, cid_hex, sig_hex;
            std::uint64_t counter = 0;
            if (!(fields >> owner_hex >> cid_hex >> counter >> sig_hex)) {
                throw DecodeError("registry: corrupt journal line");
            }
            RegistryEntry<G> entry;
            entry.owner = G::decode(from_hex(owner_hex));
            const Bytes cid = from_hex(cid_hex);
            if (cid.size() != kCidBytes) {
                throw DecodeError("registry: corrupt cid in journal");
            }
            std::copy(cid.begin(), cid.end(), entry.cid.begin());
            entry.counter = counter;
            entry.signature = from_hex(sig_hex);
            // Journal replay runs the same checks as live updates; disable
            // re-journaling while replaying.
            const auto saved = journal_;
            journal_.reset();
            apply(entry);
            journal_ = saved;
        }
    }

    std::map<std::string, RegistryEntry<G>> latest_;
    std::optional<std::filesystem::path> journal_;
};

template <PrimeOrderGroup G>
FeatureVector recover(const Registry<G>& registry, const ContentStore& store,
                      const typename G::Element& owner,
                      const SymmetricKey& key) {
    const auto entry = registry.latest(owner);
    if (!entry) {
        throw NotFoundError("recover: owner has no registry entry");
    }
    return decrypt_profile(key, store.get(entry->cid));
}

} // namespace privauth::vault

#endif // PRIVAUTH_VAULT_HPP
