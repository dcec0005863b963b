#include "rda/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rda/config_io.hpp"
#include "rda/random.hpp"

namespace rda {

namespace {

std::string encode_params(std::span<const double> params) {
    std::string bytes(params.size() * 8, '\0');
    for (std::size_t i = 0; i < params.size(); ++i) {
        std::uint64_t bits = std::bit_cast<std::uint64_t>(params[i]);
        for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
    }
    return bytes;
}

std::vector<double> decode_params(const std::string& bytes) {
    std::vector<double> params(bytes.size() / 8);
    for (std::size_t i = 0; i < params.size(); ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b)
            bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i * 8 + b])) << (8 * b);
        params[i] = std::bit_cast<double>(bits);
    }
    return params;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << v;
    return os.str();
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
    const std::string bytes = encode_params(checkpoint.network.parameters());
    nlohmann::json header{{"format", kCheckpointFormat},
                          {"version", kCheckpointVersion},
                          {"network", to_json(checkpoint.network.spec())},
                          {"env", to_json(checkpoint.env)},
                          {"learner", to_json(checkpoint.learner)},
                          {"param_count", checkpoint.network.param_count()},
                          {"param_encoding", "float64-le"},
                          {"param_fnv1a64", hex64(fnv1a64(bytes))},
                          {"info", checkpoint.info}};
    {
        std::ofstream out(path + ".params", std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + path + ".params'");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << header.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
    nlohmann::json header;
    try {
        header = read_json_file(path);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("checkpoint: ") + e.what());
    }
    if (header.value("format", "") != kCheckpointFormat || header.value("version", 0) != kCheckpointVersion)
        throw std::runtime_error("'" + path + "' is not a version-1 learner checkpoint");

    std::ifstream in(path + ".params", std::ios::binary);
    if (!in) throw std::runtime_error("missing parameter file '" + path + ".params'");
    std::ostringstream raw;
    raw << in.rdbuf();
    const std::string bytes = raw.str();

    try {
        const NetworkSpec spec = network_spec_from_json(header.at("network"));
        const std::size_t count = header.at("param_count").get<std::size_t>();
        if (count != spec.param_count() || bytes.size() != count * 8)
            throw std::runtime_error("parameter count does not match the header");
        if (header.at("param_fnv1a64").get<std::string>() != hex64(fnv1a64(bytes)))
            throw std::runtime_error("parameter checksum mismatch");
        Checkpoint ck{QNetwork(spec, decode_params(bytes)), env_from_json(header.at("env")),
                      learner_from_json(header.at("learner")), header.value("info", nlohmann::json::object())};
        return ck;
    } catch (const std::runtime_error&) {
        throw;
    } catch (const std::exception& e) {
        throw std::runtime_error("'" + path + "': " + e.what());
    }
}

}  // namespace rda
