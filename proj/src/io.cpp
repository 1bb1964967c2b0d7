#include "weilfield/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <unistd.h>

#include "weilfield/errors.hpp"

namespace weilfield {

void atomic_write(const std::filesystem::path& path, std::string_view bytes) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            out.close();
            fs::remove(tmp);
            throw std::runtime_error("write failed: " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error("rename to " + path.string() + " failed: " + ec.message());
    }
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

namespace {

std::uint64_t to_le(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::little) return v;
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
}

}  // namespace

std::string encode_history(const FieldHistory& h) {
    const auto& d = h.lattice.descriptor();
    nlohmann::json head = {{"format", "weilfield-history"},
                           {"version", 1},
                           {"topology", to_string(d.topology)},
                           {"n_space", d.n_space},
                           {"n_time", d.n_time},
                           {"dx", d.dx},
                           {"dt", d.dt},
                           {"guard", d.guard},
                           {"orders", h.algebra()->orders()},
                           {"rows", h.values.rows()},
                           {"cols", h.values.cols()},
                           {"dim", h.values.dim()}};
    std::string out = head.dump();
    out.push_back('\n');
    auto raw = h.values.raw();
    const std::size_t start = out.size();
    out.resize(start + raw.size() * 8);
    for (std::size_t k = 0; k < raw.size(); ++k) {
        std::uint64_t bits = to_le(std::bit_cast<std::uint64_t>(raw[k]));
        std::memcpy(out.data() + start + 8 * k, &bits, 8);
    }
    return out;
}

FieldHistory decode_history(std::string_view bytes) {
    const auto nl = bytes.find('\n');
    if (nl == std::string_view::npos) throw ValidationError("snapshot: missing header line");
    nlohmann::json head;
    try {
        head = nlohmann::json::parse(bytes.substr(0, nl));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("snapshot header: ") + e.what());
    }
    if (head.value("format", "") != "weilfield-history" || head.value("version", 0) != 1)
        throw ValidationError("snapshot: unknown format");
    LatticeDescriptor d;
    d.topology = topology_from_string(head.at("topology").get<std::string>());
    d.n_space = head.at("n_space").get<int>();
    d.n_time = head.at("n_time").get<int>();
    d.dx = head.at("dx").get<double>();
    d.dt = head.at("dt").get<double>();
    d.guard = head.at("guard").get<int>();
    LatticeSpacetime lat(d);
    AlgebraPtr alg = WeilAlgebra::create(head.at("orders").get<std::vector<int>>());
    const auto rows = head.at("rows").get<std::size_t>(), cols = head.at("cols").get<std::size_t>();
    if (rows != static_cast<std::size_t>(lat.n_rows()) || cols != static_cast<std::size_t>(lat.n_space()) ||
        head.at("dim").get<std::size_t>() != alg->dim())
        throw ValidationError("snapshot: shape does not match header lattice");
    WeilGrid grid(alg, rows, cols);
    auto raw = grid.raw();
    if (bytes.size() - nl - 1 != raw.size() * 8) throw ValidationError("snapshot: payload size mismatch");
    const char* p = bytes.data() + nl + 1;
    for (std::size_t k = 0; k < raw.size(); ++k) {
        std::uint64_t bits;
        std::memcpy(&bits, p + 8 * k, 8);
        raw[k] = std::bit_cast<double>(to_le(bits));
    }
    return {lat, std::move(grid)};
}

void write_history(const std::filesystem::path& path, const FieldHistory& h) { atomic_write(path, encode_history(h)); }

FieldHistory read_history(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return decode_history(ss.str());
}

}  // namespace weilfield
