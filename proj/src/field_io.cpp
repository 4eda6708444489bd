#include "dhym/field_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "dhym/error.hpp"

namespace dhym {

namespace {

constexpr char kMagic[4] = {'D', 'H', 'Y', 'M'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderSize = 4 + 4 + 1 + 1 + 4;

template <class T>
void put(std::vector<std::uint8_t>& out, T value) {
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    out.insert(out.end(), raw, raw + sizeof(T));
}

template <class T>
T get(const std::vector<std::uint8_t>& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) fail(Errc::Io, "field file truncated");
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, in.data() + pos, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    pos += sizeof(T);
    T value;
    std::memcpy(&value, raw, sizeof(T));
    return value;
}

std::vector<std::uint8_t> header(const TorusGrid& g, std::uint8_t kind, std::size_t payload_doubles) {
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderSize + 8 * payload_doubles);
    out.insert(out.end(), kMagic, kMagic + 4);
    put<std::uint32_t>(out, kVersion);
    put<std::uint8_t>(out, kind);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(g.n()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(g.N()));
    return out;
}

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) fail(Errc::Io, "cannot open '" + path + "' for writing");
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!os) fail(Errc::Io, "write to '" + path + "' failed");
}

} // namespace

std::vector<std::uint8_t> encode_field(const ScalarField& f) {
    auto out = header(f.grid, 0, f.values.size());
    for (double v : f.values) put<double>(out, v);
    return out;
}

std::vector<std::uint8_t> encode_field(const HermitianFormField& f) {
    auto out = header(f.grid(), 1, 2 * f.data().size());
    for (const Complex& z : f.data()) {
        put<double>(out, z.real());
        put<double>(out, z.imag());
    }
    return out;
}

FieldVariant decode_field(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < kHeaderSize || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        fail(Errc::Io, "not a field file (bad magic)");
    }
    std::size_t pos = 4;
    const auto version = get<std::uint32_t>(bytes, pos);
    if (version != kVersion) fail(Errc::Io, "unsupported field file version " + std::to_string(version));
    const auto kind = get<std::uint8_t>(bytes, pos);
    const auto n = get<std::uint8_t>(bytes, pos);
    const auto N = get<std::uint32_t>(bytes, pos);
    TorusGrid g;
    try {
        g = TorusGrid(n, static_cast<int>(N));
    } catch (const Error& e) {
        fail(Errc::Io, std::string("field file header: ") + e.what());
    }
    const std::size_t per_point = kind == 0 ? 1 : 2 * static_cast<std::size_t>(n) * n;
    if (kind > 1) fail(Errc::Io, "unknown field kind " + std::to_string(kind));
    if (bytes.size() != kHeaderSize + 8 * per_point * g.size()) fail(Errc::Io, "field payload has the wrong size");

    if (kind == 0) {
        ScalarField f(g);
        for (double& v : f.values) v = get<double>(bytes, pos);
        return f;
    }
    HermitianFormField f(g);
    for (Complex& z : f.data()) {
        const double re = get<double>(bytes, pos);
        const double im = get<double>(bytes, pos);
        z = Complex(re, im);
    }
    return f;
}

void write_field(const std::string& path, const ScalarField& f) { write_bytes(path, encode_field(f)); }

void write_field(const std::string& path, const HermitianFormField& f) { write_bytes(path, encode_field(f)); }

FieldVariant read_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) fail(Errc::Io, "cannot open '" + path + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return decode_field(bytes);
}

ScalarField read_scalar_field(const std::string& path) {
    FieldVariant v = read_field(path);
    if (auto* f = std::get_if<ScalarField>(&v)) return std::move(*f);
    fail(Errc::Io, "'" + path + "' holds a form field, expected a scalar field");
}

HermitianFormField read_form_field(const std::string& path) {
    FieldVariant v = read_field(path);
    if (auto* f = std::get_if<HermitianFormField>(&v)) return std::move(*f);
    fail(Errc::Io, "'" + path + "' holds a scalar field, expected a form field");
}

} // namespace dhym
