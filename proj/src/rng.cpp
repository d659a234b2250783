#include "qshuttle/rng.hpp"

#include <stdexcept>

namespace qshuttle {

uint64_t fnv1a64(std::string_view bytes) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RngStream::RngStream(uint64_t master_seed, std::string_view label)
    : master_(master_seed), label_(label) {
    const uint64_t mixed = splitmix64(master_seed ^ splitmix64(fnv1a64(label)));
    engine_.seed(mixed);
}

RngStream RngStream::child(std::string_view sub) const {
    std::string full = label_;
    full += '/';
    full += sub;
    return RngStream(master_, full);
}

double RngStream::uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
}

double RngStream::normal(double mean, double sigma) {
    if (sigma == 0.0) return mean;
    return std::normal_distribution<double>(mean, sigma)(engine_);
}

int64_t RngStream::binomial(int64_t trials, double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("binomial: p outside [0,1]");
    if (trials < 1) throw std::invalid_argument("binomial: trials must be >= 1");
    if (p == 0.0) return 0;
    if (p == 1.0) return trials;
    return std::binomial_distribution<int64_t>(trials, p)(engine_);
}

uint64_t RngStream::uniform_below(uint64_t bound) {
    return std::uniform_int_distribution<uint64_t>(0, bound - 1)(engine_);
}

}  // namespace qshuttle
