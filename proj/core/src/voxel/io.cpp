#include "c2ft/voxel/io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "c2ft/error.hpp"

namespace c2ft::vox {

namespace {

// Reads one '\n'-terminated line starting at `pos`; advances past the newline.
bool next_line(std::span<const std::uint8_t> bytes, std::size_t& pos, std::string& line) {
    if (pos >= bytes.size()) return false;
    line.clear();
    while (pos < bytes.size() && bytes[pos] != '\n') line.push_back(static_cast<char>(bytes[pos++]));
    if (pos >= bytes.size()) return false;
    ++pos;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

template <class U>
void append_le(Bytes& out, U value) {
    auto raw = std::bit_cast<std::array<std::uint8_t, sizeof(U)>>(value);
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
    out.insert(out.end(), raw.begin(), raw.end());
}

template <class U>
U load_le(const std::uint8_t* p) {
    std::array<std::uint8_t, sizeof(U)> raw;
    std::memcpy(raw.data(), p, sizeof(U));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
    return std::bit_cast<U>(raw);
}

}  // namespace

VoxelGrid read_binvox(std::span<const std::uint8_t> bytes, BinvoxMeta* meta) {
    std::size_t pos = 0;
    std::string line;
    if (!next_line(bytes, pos, line) || line.rfind("#binvox", 0) != 0)
        fail(ErrorCode::MalformedHeader, "missing '#binvox' magic");

    std::size_t dims[3] = {0, 0, 0};
    BinvoxMeta parsed;
    bool have_dim = false;
    bool have_data = false;
    while (next_line(bytes, pos, line)) {
        std::istringstream in(line);
        std::string key;
        in >> key;
        if (key == "data") {
            have_data = true;
            break;
        }
        if (key == "dim") {
            if (!(in >> dims[0] >> dims[1] >> dims[2])) fail(ErrorCode::MalformedHeader, "bad dim line");
            have_dim = true;
        } else if (key == "translate") {
            if (!(in >> parsed.translate[0] >> parsed.translate[1] >> parsed.translate[2]))
                fail(ErrorCode::MalformedHeader, "bad translate line");
        } else if (key == "scale") {
            if (!(in >> parsed.scale)) fail(ErrorCode::MalformedHeader, "bad scale line");
        } else {
            fail(ErrorCode::MalformedHeader, "unknown header key '" + key + "'");
        }
    }
    if (!have_dim || !have_data) fail(ErrorCode::MalformedHeader, "header lacks dim or data line");
    if (dims[0] == 0 || dims[0] != dims[1] || dims[1] != dims[2])
        fail(ErrorCode::DimMismatch, "only non-empty cubic binvox grids are supported");

    const std::size_t side = dims[0];
    const std::size_t total = side * side * side;
    std::vector<double> raw(total, 0.0);
    std::size_t filled = 0;
    while (filled < total) {
        if (pos + 1 >= bytes.size()) fail(ErrorCode::TruncatedRLE, "run-length data ends early");
        const std::uint8_t value = bytes[pos];
        const std::uint8_t count = bytes[pos + 1];
        pos += 2;
        if (filled + count > total) fail(ErrorCode::DimMismatch, "run-length data overflows the grid");
        std::fill_n(raw.begin() + static_cast<std::ptrdiff_t>(filled), count, value ? 1.0 : 0.0);
        filled += count;
    }

    // File order is (x, z, y) with y fastest; ours is (x, y, z) with z fastest.
    std::vector<double> values(total);
    for (std::size_t x = 0; x < side; ++x)
        for (std::size_t z = 0; z < side; ++z)
            for (std::size_t y = 0; y < side; ++y)
                values[(x * side + y) * side + z] = raw[(x * side + z) * side + y];
    if (meta) *meta = parsed;
    return VoxelGrid(side, std::move(values), GridKind::Binary);
}

Bytes write_binvox(const VoxelGrid& grid, const BinvoxMeta& meta) {
    if (grid.kind() != GridKind::Binary) fail(ErrorCode::InvalidArgument, "binvox stores binary grids only");
    const std::size_t side = grid.side();
    std::ostringstream header;
    header.precision(17);
    header << "#binvox 1\n"
           << "dim " << side << ' ' << side << ' ' << side << '\n'
           << "translate " << meta.translate[0] << ' ' << meta.translate[1] << ' ' << meta.translate[2] << '\n'
           << "scale " << meta.scale << '\n'
           << "data\n";
    const std::string h = header.str();
    Bytes out(h.begin(), h.end());

    std::uint8_t current = 0;
    std::uint8_t run = 0;
    for (std::size_t x = 0; x < side; ++x)
        for (std::size_t z = 0; z < side; ++z)
            for (std::size_t y = 0; y < side; ++y) {
                const std::uint8_t v = grid.at(x, y, z) != 0.0 ? 1 : 0;
                if (run > 0 && (v != current || run == 255)) {
                    out.push_back(current);
                    out.push_back(run);
                    run = 0;
                }
                current = v;
                ++run;
            }
    if (run > 0) {
        out.push_back(current);
        out.push_back(run);
    }
    return out;
}

Bytes write_voxraw(const VoxelGrid& grid, RawDtype dtype) {
    const std::string header =
        "VOXRAW " + std::to_string(grid.side()) + (dtype == RawDtype::F32 ? " f32\n" : " f64\n");
    Bytes out(header.begin(), header.end());
    out.reserve(out.size() + grid.size() * (dtype == RawDtype::F32 ? 4 : 8));
    for (const double v : grid.values()) {
        if (dtype == RawDtype::F32)
            append_le(out, static_cast<float>(v));
        else
            append_le(out, v);
    }
    return out;
}

VoxelGrid read_voxraw(std::span<const std::uint8_t> bytes) {
    std::size_t pos = 0;
    std::string line;
    if (!next_line(bytes, pos, line)) fail(ErrorCode::MalformedHeader, "missing VOXRAW header line");
    std::istringstream in(line);
    std::string magic;
    std::string dtype;
    long long side = 0;
    if (!(in >> magic >> side >> dtype) || magic != "VOXRAW" || side <= 0 || (dtype != "f32" && dtype != "f64"))
        fail(ErrorCode::MalformedHeader, "expected 'VOXRAW <side> <f32|f64>'");
    std::string extra;
    if (in >> extra) fail(ErrorCode::MalformedHeader, "trailing header fields");

    const auto n = static_cast<std::size_t>(side) * static_cast<std::size_t>(side) * static_cast<std::size_t>(side);
    const std::size_t width = dtype == "f32" ? 4 : 8;
    if (bytes.size() - pos != n * width)
        fail(ErrorCode::SizeMismatch, "payload holds " + std::to_string(bytes.size() - pos) + " bytes, header implies " +
                                          std::to_string(n * width));
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t* p = bytes.data() + pos + i * width;
        values[i] = width == 4 ? static_cast<double>(load_le<float>(p)) : load_le<double>(p);
    }
    return VoxelGrid(static_cast<std::size_t>(side), std::move(values), GridKind::Continuous);
}

Bytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::Io, "short write to " + path.string());
}

}  // namespace c2ft::vox
