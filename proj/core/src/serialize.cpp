#include "filtlab/serialize.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace filtlab {

namespace {

constexpr char kMagic[8] = {'F', 'L', 'E', 'N', 'S', '0', '1', '\0'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("ensemble file truncated");
    return v;
}

} // namespace

void write_ensemble_binary(const std::string& file, const PathEnsemble& ensemble) {
    std::ofstream os(file, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + file + " for writing");
    os.write(kMagic, sizeof(kMagic));
    put(os, kVersion);
    put(os, static_cast<std::uint64_t>(ensemble.n_times()));
    put(os, static_cast<std::uint64_t>(ensemble.n_paths()));
    put(os, ensemble.seed());
    put(os, static_cast<std::uint32_t>(ensemble.stream_scheme().size()));
    os.write(ensemble.stream_scheme().data(),
             static_cast<std::streamsize>(ensemble.stream_scheme().size()));
    os.write(reinterpret_cast<const char*>(ensemble.grid().times().data()),
             static_cast<std::streamsize>(ensemble.n_times() * sizeof(double)));
    os.write(reinterpret_cast<const char*>(ensemble.data().data()),
             static_cast<std::streamsize>(ensemble.data().size() * sizeof(double)));
    if (!os) throw std::runtime_error("write failed: " + file);
}

PathEnsemble read_ensemble_binary(const std::string& file) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + file);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("not an ensemble file: " + file);
    if (get<std::uint32_t>(is) != kVersion)
        throw std::runtime_error("unsupported ensemble file version: " + file);
    const auto n_times = get<std::uint64_t>(is);
    const auto n_paths = get<std::uint64_t>(is);
    const auto seed = get<std::uint64_t>(is);
    const auto scheme_len = get<std::uint32_t>(is);
    std::string scheme(scheme_len, '\0');
    is.read(scheme.data(), scheme_len);
    std::vector<double> times(n_times);
    is.read(reinterpret_cast<char*>(times.data()),
            static_cast<std::streamsize>(n_times * sizeof(double)));
    PathEnsemble out(TimeGrid(std::move(times)), n_paths, seed, scheme);
    is.read(reinterpret_cast<char*>(const_cast<double*>(out.data().data())),
            static_cast<std::streamsize>(out.data().size() * sizeof(double)));
    if (!is) throw std::runtime_error("ensemble file truncated: " + file);
    return out;
}

void write_ensemble_csv(const std::string& file, const PathEnsemble& ensemble,
                        std::size_t max_paths) {
    std::ofstream os(file);
    if (!os) throw std::runtime_error("cannot open " + file + " for writing");
    const std::size_t cols = std::min(ensemble.n_paths(), max_paths);
    os.precision(17);
    os << "time";
    for (std::size_t p = 0; p < cols; ++p) os << ",path" << p;
    os << "\n";
    for (std::size_t k = 0; k < ensemble.n_times(); ++k) {
        os << ensemble.grid()[k];
        for (std::size_t p = 0; p < cols; ++p) os << "," << ensemble(p, k);
        os << "\n";
    }
    if (!os) throw std::runtime_error("write failed: " + file);
}

} // namespace filtlab
