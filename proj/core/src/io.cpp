#include "besovwf/io.hpp"

#include "besovwf/error.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace besovwf::io {
namespace {

static_assert(std::endian::native == std::endian::little, "binary field format assumes a little-endian host");

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out)
{
    std::ofstream out(path, mode);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    return out;
}

template <class T>
void put(std::ostream& out, T v)
{
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.write(buf, sizeof(T));
}

template <class T>
T get(std::istream& in)
{
    char buf[sizeof(T)];
    if (!in.read(buf, sizeof(T))) throw Error("field file truncated");
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

}  // namespace

std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

void write_field(const std::filesystem::path& path, const Field& f)
{
    auto out = open_out(path, std::ios::binary);
    out.write("BWF1", 4);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(f.spec().dim));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(f.spec().n));
    put<double>(out, f.spec().length);
    for (const auto& v : f.samples()) {
        put<double>(out, v.real());
        put<double>(out, v.imag());
    }
    if (!out) throw Error("write failed: " + path.string());
}

Field read_field(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "BWF1", 4) != 0) throw Error("not a BWF1 field file: " + path.string());
    GridSpec spec;
    spec.dim = get<std::uint8_t>(in);
    spec.n = get<std::uint32_t>(in);
    spec.length = get<double>(in);
    spec.validate();
    std::vector<cplx> samples(spec.size());
    for (auto& v : samples) {
        const double re = get<double>(in);
        const double im = get<double>(in);
        v = {re, im};
    }
    return Field(spec, std::move(samples));
}

void write_field_csv(const std::filesystem::path& path, const Field& f)
{
    std::ostringstream os;
    const bool two = f.spec().dim == 2;
    os << (two ? "i0,i1,re,im\n" : "i0,re,im\n");
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (two) os << i / f.spec().n << ',' << i % f.spec().n;
        else os << i;
        os << ',' << format_double(f[i].real()) << ',' << format_double(f[i].imag()) << '\n';
    }
    write_text(path, os.str());
}

void write_pgm(const std::filesystem::path& path, std::size_t width, std::size_t height,
               const std::vector<double>& values, double lo, double hi)
{
    if (values.size() != width * height) throw InvalidArgument("pgm: value count does not match image size");
    auto out = open_out(path, std::ios::binary);
    out << "P5\n" << width << ' ' << height << "\n255\n";
    const double span = hi > lo ? hi - lo : 1.0;
    for (double v : values) {
        const double t = std::isfinite(v) ? std::clamp((v - lo) / span, 0.0, 1.0) : (v > 0 ? 1.0 : 0.0);
        out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * t))));
    }
    if (!out) throw Error("write failed: " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    auto out = open_out(path, std::ios::binary);
    out << text;
    if (!out) throw Error("write failed: " + path.string());
}

}  // namespace besovwf::io
