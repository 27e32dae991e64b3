#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "oatbell/lattice.hpp"
#include "oatbell/math_util.hpp"

namespace oatbell {

namespace {
constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(const std::vector<unsigned char>& bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= bytes.size(); i += 3) {
        const unsigned v = unsigned(bytes[i]) << 16 | unsigned(bytes[i + 1]) << 8 | bytes[i + 2];
        out += kAlphabet[v >> 18];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
        out += kAlphabet[v & 63];
    }
    const std::size_t rest = bytes.size() - i;
    if (rest == 1) {
        const unsigned v = unsigned(bytes[i]) << 16;
        out += kAlphabet[v >> 18];
        out += kAlphabet[(v >> 12) & 63];
        out += "==";
    } else if (rest == 2) {
        const unsigned v = unsigned(bytes[i]) << 16 | unsigned(bytes[i + 1]) << 8;
        out += kAlphabet[v >> 18];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
    int lut[256];
    std::memset(lut, -1, sizeof lut);
    for (int i = 0; i < 64; ++i) lut[static_cast<unsigned char>(kAlphabet[i])] = i;
    std::vector<unsigned char> out;
    out.reserve(text.size() / 4 * 3);
    unsigned acc = 0;
    int bits = 0;
    for (char c : text) {
        if (c == '=' || c == '\n' || c == '\r') continue;
        const int v = lut[static_cast<unsigned char>(c)];
        if (v < 0) throw std::invalid_argument("base64_decode: invalid character in input");
        acc = acc << 6 | unsigned(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<unsigned char>((acc >> bits) & 0xffu));
        }
    }
    return out;
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
    // amplitudes as raw little-endian complex128 pairs (bit-exact round trip)
    std::vector<unsigned char> raw(ck.amplitudes.size() * sizeof(cplx));
    if (!raw.empty()) std::memcpy(raw.data(), ck.amplitudes.data(), raw.size());
    nlohmann::json j{
        {"schema", 1},
        {"params",
         {{"n_sites", ck.params.n_sites},
          {"n_atoms", ck.params.n_atoms},
          {"v0", ck.params.v0},
          {"j_hop", ck.params.j_hop},
          {"u_aa", ck.params.u_aa},
          {"u_bb", ck.params.u_bb},
          {"u_ab", ck.params.u_ab},
          {"boundary", boundary_name(ck.params.boundary)}}},
        {"basis_hash", ck.basis_hash},
        {"dimension", ck.dimension},
        {"step", ck.step},
        {"time", ck.time},
        {"amplitudes", base64_encode(raw)},
    };
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::invalid_argument("save_checkpoint: cannot open '" + path + "' for writing");
    f << j.dump(1) << '\n';
    if (!f) throw std::invalid_argument("save_checkpoint: short write to '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::invalid_argument("load_checkpoint: cannot open '" + path + "'");
    Checkpoint ck;
    try {
        const nlohmann::json j = nlohmann::json::parse(f);
        if (j.at("schema").get<int>() != 1)
            throw std::invalid_argument("load_checkpoint: unsupported schema version");
        const auto& p = j.at("params");
        ck.params.n_sites = p.at("n_sites").get<int>();
        ck.params.n_atoms = p.at("n_atoms").get<int>();
        ck.params.v0 = p.at("v0").get<double>();
        ck.params.j_hop = p.at("j_hop").get<double>();
        ck.params.u_aa = p.at("u_aa").get<double>();
        ck.params.u_bb = p.at("u_bb").get<double>();
        ck.params.u_ab = p.at("u_ab").get<double>();
        ck.params.boundary = boundary_from_name(p.at("boundary").get<std::string>());
        ck.basis_hash = j.at("basis_hash").get<std::uint64_t>();
        ck.dimension = j.at("dimension").get<std::size_t>();
        ck.step = j.at("step").get<std::int64_t>();
        ck.time = j.at("time").get<double>();
        const auto raw = base64_decode(j.at("amplitudes").get<std::string>());
        if (raw.size() != ck.dimension * sizeof(cplx))
            throw std::invalid_argument("load_checkpoint: amplitude payload size does not match dimension");
        ck.amplitudes.resize(ck.dimension);
        if (!raw.empty()) std::memcpy(ck.amplitudes.data(), raw.data(), raw.size());
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("load_checkpoint: malformed checkpoint '" + path + "': " + e.what());
    }
    return ck;
}

}  // namespace oatbell
