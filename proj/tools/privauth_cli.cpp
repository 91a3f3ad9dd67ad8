#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sodium.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "privauth/privauth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using R255 = privauth::Ristretto255Group;
using ServerT = privauth::Server<R255>;
using ClientT = privauth::Client<R255>;

namespace {

constexpr const char* kServerFile = "server.json";
constexpr const char* kJournalFile = "registry.journal";
constexpr const char* kStoreDir = "store";
constexpr const char* kClientsDir = "clients";

struct ServerParams {
    std::uint64_t seed = 0;
    std::size_t n_f = 3;
    double low = 0.33;
    double high = 0.66;
    double lo = 0.0;
    double hi = 100.0;
};

std::uint64_t random_seed() {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

ServerParams load_params(const fs::path& dir) {
    std::ifstream in(dir / kServerFile);
    if (!in) {
        throw privauth::Error("no server configuration in " + dir.string() +
                              "; run setup first");
    }
    const json j = json::parse(in);
    ServerParams p;
    p.seed = j.at("seed").get<std::uint64_t>();
    p.n_f = j.at("n_f").get<std::size_t>();
    p.low = j.at("low").get<double>();
    p.high = j.at("high").get<double>();
    p.lo = j.at("lo").get<double>();
    p.hi = j.at("hi").get<double>();
    return p;
}

void store_params(const fs::path& dir, const ServerParams& p) {
    json j;
    j["seed"] = p.seed;
    j["n_f"] = p.n_f;
    j["low"] = p.low;
    j["high"] = p.high;
    j["lo"] = p.lo;
    j["hi"] = p.hi;
    std::ofstream out(dir / kServerFile, std::ios::trunc);
    out << j.dump(2) << '\n';
    if (!out) {
        throw privauth::Error("failed to write server configuration");
    }
}

// The private key is never serialized; the server is rebuilt from its seed
// on every invocation and lands on the same keypair.
ServerT build_server(const ServerParams& p) {
    typename ServerT::Config cfg;
    cfg.policy = privauth::RiskPolicy::uniform(p.n_f, p.low, p.high);
    cfg.bounds.assign(p.n_f, {p.lo, p.hi});
    privauth::Rng rng(p.seed, "server");
    return ServerT(cfg, rng);
}

std::string user_file_id(const std::string& username) {
    std::array<std::uint8_t, 16> digest;
    crypto_generichash(digest.data(), digest.size(),
                       reinterpret_cast<const unsigned char*>(username.data()),
                       username.size(), nullptr, 0);
    return privauth::to_hex(digest);
}

privauth::FeatureVector parse_feature_file(const fs::path& path,
                                           privauth::FeatureBounds bounds) {
    std::ifstream in(path);
    if (!in) {
        throw privauth::Error("cannot open features file " + path.string());
    }
    privauth::FeatureVector out;
    bool saw_value = false;
    bool saw_bounds = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const auto begin = line.find_first_not_of(" \t\r");
        if (begin == std::string::npos) continue;
        line = line.substr(begin, line.find_last_not_of(" \t\r") - begin + 1);

        const std::string where =
            path.filename().string() + ":" + std::to_string(lineno);
        if (line.rfind("bounds", 0) == 0) {
            if (saw_bounds || saw_value) {
                throw privauth::DecodeError(
                    where + ": bounds header must appear once, before values");
            }
            std::istringstream fields(line.substr(6));
            std::string extra;
            if (!(fields >> bounds.lo >> bounds.hi) || (fields >> extra)) {
                throw privauth::DecodeError(where + ": malformed bounds header");
            }
            saw_bounds = true;
            continue;
        }
        try {
            std::size_t used = 0;
            const double value = std::stod(line, &used);
            if (used != line.size()) {
                throw std::invalid_argument(line);
            }
            out.values.push_back(value);
        } catch (const std::logic_error&) {
            throw privauth::DecodeError(where + ": expected one decimal value");
        }
        saw_value = true;
    }
    out.bounds.assign(out.values.size(), bounds);
    out.validate();
    return out;
}

std::string format_features(const privauth::FeatureVector& features) {
    std::string text = "bounds " + fmt_double(features.bounds.at(0).lo) + ' ' +
                       fmt_double(features.bounds.at(0).hi) + '\n';
    for (const double v : features.values) {
        text += fmt_double(v) + '\n';
    }
    return text;
}

void write_snapshot(const fs::path& path, const ClientT::Snapshot& state) {
    json j;
    j["sym_key"] = privauth::to_hex(state.sym_key);
    j["signing_secret"] = privauth::to_hex(R255::encode_scalar(state.signing_secret));
    j["oprf_output"] = privauth::to_hex(R255::encode(state.oprf_output.element));
    j["server_pub"] = privauth::to_hex(R255::encode(state.server_pub));
    j["nonce"] = privauth::to_hex(state.encrypted_profile.nonce);
    j["tag"] = privauth::to_hex(state.encrypted_profile.tag);
    j["body"] = privauth::to_hex(state.encrypted_profile.body);
    json bounds = json::array();
    for (const auto& b : state.bounds) {
        bounds.push_back({b.lo, b.hi});
    }
    j["bounds"] = bounds;
    std::ofstream out(path, std::ios::trunc);
    out << j.dump(2) << '\n';
    if (!out) {
        throw privauth::Error("failed to write client state");
    }
}

ClientT::Snapshot read_snapshot(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw privauth::Error("no registration found for this user");
    }
    const json j = json::parse(in);
    const auto hex_field = [&](const char* key) {
        return privauth::from_hex(j.at(key).get<std::string>());
    };
    ClientT::Snapshot state;
    state.sym_key = privauth::to_array<privauth::vault::kKeyBytes>(hex_field("sym_key"));
    state.signing_secret = R255::decode_scalar(hex_field("signing_secret"));
    state.oprf_output = {R255::decode(hex_field("oprf_output"))};
    state.server_pub = R255::decode(hex_field("server_pub"));
    state.encrypted_profile.nonce = hex_field("nonce");
    state.encrypted_profile.tag = hex_field("tag");
    state.encrypted_profile.body = hex_field("body");
    for (const auto& pair : j.at("bounds")) {
        state.bounds.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
    }
    return state;
}

void require_matching_schema(const privauth::FeatureVector& features,
                             const ServerParams& params,
                             const std::string& what) {
    if (features.size() != params.n_f) {
        throw privauth::ParameterError(
            what + " has " + std::to_string(features.size()) +
            " features, server schema expects " + std::to_string(params.n_f));
    }
    for (const auto& b : features.bounds) {
        if (b.lo != params.lo || b.hi != params.hi) {
            throw privauth::ParameterError(
                what + " bounds differ from server schema [" +
                fmt_double(params.lo) + ", " + fmt_double(params.hi) + "]");
        }
    }
}

int cmd_setup(const fs::path& dir, bool force, std::optional<std::uint64_t> seed,
              ServerParams params) {
    fs::create_directories(dir);
    if (fs::exists(dir / kServerFile) && !force) {
        std::cerr << "error: " << (dir / kServerFile).string()
                  << " already exists; pass --force to replace it\n";
        return 1;
    }
    params.seed = seed.value_or(random_seed());
    privauth::RiskPolicy::uniform(params.n_f, params.low, params.high).validate();
    if (!(params.lo < params.hi)) {
        throw privauth::ParameterError("feature bounds must satisfy lo < hi");
    }
    store_params(dir, params);
    fs::create_directories(dir / kStoreDir);
    fs::create_directories(dir / kClientsDir);
    std::ofstream(dir / kJournalFile, std::ios::app);

    const ServerT server = build_server(params);
    std::cout << "pubkey: " << privauth::to_hex(R255::encode(server.public_key()))
              << '\n';
    return 0;
}

int cmd_register(const fs::path& dir, const std::string& user,
                 const std::string& pass, const fs::path& features_path,
                 std::optional<std::uint64_t> seed) {
    const ServerParams params = load_params(dir);
    const auto profile =
        parse_feature_file(features_path, {params.lo, params.hi});
    require_matching_schema(profile, params, "profile");

    ServerT server = build_server(params);
    privauth::vault::FileContentStore store(dir / kStoreDir);
    privauth::vault::Registry<R255> registry(dir / kJournalFile);
    ClientT client(user, pass,
                   privauth::Rng(seed.value_or(random_seed()), "cli/client"));
    const auto id = user_file_id(user);
    const auto snapshot_path = dir / kClientsDir / (id + ".json");
    if (fs::exists(snapshot_path)) {
        // Same device identity across re-registrations; the registry counter
        // keeps advancing for this owner.
        client.adopt_identity(read_snapshot(snapshot_path).signing_secret);
    }
    privauth::LoopbackTransport<ServerT> link(server);
    client.register_user(profile, link, store, registry);

    const auto state = client.snapshot();
    write_snapshot(snapshot_path, state);
    {
        std::ofstream key_out(dir / kClientsDir / (id + ".key"),
                              std::ios::binary | std::ios::trunc);
        key_out.write(reinterpret_cast<const char*>(state.sym_key.data()),
                      static_cast<std::streamsize>(state.sym_key.size()));
        if (!key_out) {
            throw privauth::Error("failed to write recovery key file");
        }
    }

    const auto entry = registry.latest(client.owner_pub());
    std::cout << "owner: " << privauth::to_hex(R255::encode(client.owner_pub()))
              << '\n'
              << "cid: " << privauth::to_hex(entry->cid) << '\n'
              << "counter: " << entry->counter << '\n';
    return 0;
}

int cmd_auth(const fs::path& dir, const std::string& user,
             const std::string& pass, const fs::path& live_path, double epsilon,
             std::optional<std::uint64_t> seed) {
    const ServerParams params = load_params(dir);
    const auto live = parse_feature_file(live_path, {params.lo, params.hi});
    require_matching_schema(live, params, "live vector");

    ServerT server = build_server(params);
    const auto state = read_snapshot(dir / kClientsDir /
                                     (user_file_id(user) + ".json"));
    ClientT client(user, pass,
                   privauth::Rng(seed.value_or(random_seed()), "cli/auth"),
                   state);
    privauth::LoopbackTransport<ServerT> link(server);
    const privauth::PrivacyBudget budget{
        epsilon,
        privauth::derive_sensitivity(server.config().policy,
                                     server.config().bounds)};
    ClientT::AuthResult result;
    try {
        result = client.authenticate(live, budget, link);
    } catch (const privauth::AuthRejectedError& e) {
        std::cerr << "authentication rejected: " << e.what() << '\n';
        return 2;
    }
    char risk[32];
    std::snprintf(risk, sizeof risk, "%.6f", result.risk_score);
    std::cout << "risk: " << risk << '\n'
              << "decision: " << privauth::to_string(result.requirement) << '\n';
    switch (result.requirement) {
        case privauth::AuthRequirement::Standard: return 0;
        case privauth::AuthRequirement::StepUp: return 10;
        case privauth::AuthRequirement::Advanced: return 11;
    }
    return 1;
}

int cmd_recover(const fs::path& dir, const std::string& owner_hex,
                const fs::path& key_path, const std::string& out_path) {
    privauth::vault::Registry<R255> registry(dir / kJournalFile);
    privauth::vault::FileContentStore store(dir / kStoreDir);

    const auto owner = R255::decode(privauth::from_hex(owner_hex));
    std::ifstream key_in(key_path, std::ios::binary);
    if (!key_in) {
        throw privauth::Error("cannot open key file " + key_path.string());
    }
    std::ostringstream key_buf;
    key_buf << key_in.rdbuf();
    const auto key_bytes = privauth::to_bytes(key_buf.str());
    if (key_bytes.size() != privauth::vault::kKeyBytes) {
        throw privauth::Error("key file must hold exactly 32 bytes");
    }
    const auto key = privauth::to_array<privauth::vault::kKeyBytes>(key_bytes);

    privauth::FeatureVector profile;
    try {
        profile = privauth::vault::recover(registry, store, owner, key);
    } catch (const privauth::NotFoundError& e) {
        std::cerr << "recovery failed: " << e.what() << '\n';
        return 3;
    } catch (const privauth::DecryptError& e) {
        std::cerr << "recovery failed: " << e.what() << '\n';
        return 4;
    }

    const std::string text = format_features(profile);
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path, std::ios::trunc);
        out << text;
        if (!out) {
            throw privauth::Error("failed to write " + out_path);
        }
    }
    return 0;
}

int cmd_bench(const std::vector<std::size_t>& features, std::size_t trials,
              std::uint64_t seed, double loss, double congestion,
              std::size_t chunk, bool detailed, const std::string& out_path) {
    privauth::simnet::NetConfig cfg;
    cfg.seed = seed;
    cfg.base_loss = loss;
    cfg.congestion = congestion;
    cfg.base_chunk = chunk;
    const auto rows = detailed
                          ? privauth::simnet::run_benchmark_detailed(features, cfg, trials)
                          : privauth::simnet::run_benchmark(features, cfg, trials);
    if (out_path.empty()) {
        std::cout << privauth::simnet::to_csv(rows);
    } else {
        privauth::simnet::export_csv(rows, out_path);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    if (sodium_init() < 0) {
        std::cerr << "error: libsodium initialization failed\n";
        return 1;
    }

    CLI::App app{"Privacy-preserving risk-based authentication toolkit"};
    app.require_subcommand(1);

    const auto add_dir = [](CLI::App* cmd, std::string& dir) {
        cmd->add_option("--dir", dir, "Data directory")
            ->envname("PRIVAUTH_DATA_DIR")
            ->capture_default_str();
    };

    std::string setup_dir = "privauth-data";
    bool setup_force = false;
    std::optional<std::uint64_t> setup_seed;
    ServerParams setup_params;
    auto* setup = app.add_subcommand("setup", "Create the server keypair and stores");
    add_dir(setup, setup_dir);
    setup->add_flag("--force", setup_force, "Replace an existing deployment");
    setup->add_option("--seed", setup_seed, "Server key seed (random if absent)");
    setup->add_option("--features", setup_params.n_f, "Feature count n_f")
        ->capture_default_str();
    setup->add_option("--low", setup_params.low, "Risk threshold tau_1")
        ->capture_default_str();
    setup->add_option("--high", setup_params.high, "Risk threshold tau_2")
        ->capture_default_str();
    setup->add_option("--lo", setup_params.lo, "Feature lower bound")
        ->capture_default_str();
    setup->add_option("--hi", setup_params.hi, "Feature upper bound")
        ->capture_default_str();

    std::string reg_dir = "privauth-data", reg_user, reg_pass, reg_features;
    std::optional<std::uint64_t> reg_seed;
    auto* reg = app.add_subcommand("register", "Register a user and back up the profile");
    add_dir(reg, reg_dir);
    reg->add_option("--user", reg_user, "Username")->required();
    reg->add_option("--pass", reg_pass, "Password")->required();
    reg->add_option("--features", reg_features, "Profile feature file")->required();
    reg->add_option("--seed", reg_seed, "Client randomness seed");

    std::string auth_dir = "privauth-data", auth_user, auth_pass, auth_live;
    double auth_epsilon = 1.0;
    std::optional<std::uint64_t> auth_seed;
    auto* auth = app.add_subcommand("auth", "Authenticate with live features");
    add_dir(auth, auth_dir);
    auth->add_option("--user", auth_user, "Username")->required();
    auth->add_option("--pass", auth_pass, "Password")->required();
    auth->add_option("--live", auth_live, "Live feature file")->required();
    auth->add_option("--epsilon", auth_epsilon, "Privacy budget epsilon")
        ->capture_default_str();
    auth->add_option("--seed", auth_seed, "Client randomness seed");

    std::string rec_dir = "privauth-data", rec_owner, rec_key, rec_out;
    auto* rec = app.add_subcommand("recover", "Recover a profile onto a new device");
    add_dir(rec, rec_dir);
    rec->add_option("--owner", rec_owner, "Owner public key (hex)")->required();
    rec->add_option("--key", rec_key, "Symmetric key file (32 raw bytes)")->required();
    rec->add_option("--out", rec_out, "Write features here instead of stdout");

    std::vector<std::size_t> bench_features{1, 5, 10, 15, 20, 25, 30};
    std::size_t bench_trials = 10, bench_chunk = 1024;
    std::uint64_t bench_seed = 1;
    double bench_loss = 0.10, bench_congestion = 1.0;
    bool bench_detailed = false;
    std::string bench_out;
    auto* bench = app.add_subcommand("bench", "Run the protocol benchmark sweep");
    bench->add_option("--features", bench_features, "Feature counts")
        ->delimiter(',')
        ->capture_default_str();
    bench->add_option("--trials", bench_trials, "Trials per cell")
        ->capture_default_str();
    bench->add_option("--seed", bench_seed, "Simulation seed")
        ->capture_default_str();
    bench->add_option("--loss", bench_loss, "Base chunk loss rate")
        ->capture_default_str();
    bench->add_option("--congestion", bench_congestion, "Congestion factor")
        ->capture_default_str();
    bench->add_option("--chunk", bench_chunk, "Base chunk size in bytes")
        ->capture_default_str();
    bench->add_flag("--detailed", bench_detailed,
                    "Add retransmission, byte, and op-count rows");
    bench->add_option("--out", bench_out, "Write CSV here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (setup->parsed()) {
            return cmd_setup(setup_dir, setup_force, setup_seed, setup_params);
        }
        if (reg->parsed()) {
            return cmd_register(reg_dir, reg_user, reg_pass, reg_features, reg_seed);
        }
        if (auth->parsed()) {
            return cmd_auth(auth_dir, auth_user, auth_pass, auth_live,
                            auth_epsilon, auth_seed);
        }
        if (rec->parsed()) {
            return cmd_recover(rec_dir, rec_owner, rec_key, rec_out);
        }
        if (bench->parsed()) {
            return cmd_bench(bench_features, bench_trials, bench_seed, bench_loss,
                             bench_congestion, bench_chunk, bench_detailed,
                             bench_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
