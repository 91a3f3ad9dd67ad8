#ifndef PRIVAUTH_METRICS_HPP
#define PRIVAUTH_METRICS_HPP

#include <cstdint>

namespace privauth {

enum class Phase { Setup, Auth };

// Instrumented operation counts, one field per operation class in the
// protocol's cost accounting.
struct OpCounters {
    std::uint64_t sym_keygens = 0;
    std::uint64_t sig_keygens = 0;
    std::uint64_t ecdh_keygens = 0;
    std::uint64_t feature_extractions = 0;
    std::uint64_t sym_encryptions = 0;
    std::uint64_t sym_decryptions = 0;
    std::uint64_t hashes = 0;
    std::uint64_t prf_evals = 0;
    std::uint64_t verifications = 0;
    std::uint64_t noise_additions = 0;
    std::uint64_t aggregations = 0;
    std::uint64_t risk_scores = 0;
    std::uint64_t decisions = 0;
    std::uint64_t signatures = 0;

    bool operator==(const OpCounters&) const = default;

    std::uint64_t total() const {
        return sym_keygens + sig_keygens + ecdh_keygens + feature_extractions +
               sym_encryptions + sym_decryptions + hashes + prf_evals +
               verifications + noise_additions + aggregations + risk_scores +
               decisions + signatures;
    }

    OpCounters& operator+=(const OpCounters& other) {
        sym_keygens += other.sym_keygens;
        sig_keygens += other.sig_keygens;
        ecdh_keygens += other.ecdh_keygens;
        feature_extractions += other.feature_extractions;
        sym_encryptions += other.sym_encryptions;
        sym_decryptions += other.sym_decryptions;
        hashes += other.hashes;
        prf_evals += other.prf_evals;
        verifications += other.verifications;
        noise_additions += other.noise_additions;
        aggregations += other.aggregations;
        risk_scores += other.risk_scores;
        decisions += other.decisions;
        signatures += other.signatures;
        return *this;
    }
};

} // namespace privauth

#endif // PRIVAUTH_METRICS_HPP
