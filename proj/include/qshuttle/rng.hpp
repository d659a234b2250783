#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace qshuttle {

uint64_t fnv1a64(std::string_view bytes);
uint64_t splitmix64(uint64_t x);

/// A labeled child stream derived from a master seed. Labels are stable
/// strings like "rb/seq/17", so a run is reproducible from (seed, label)
/// regardless of scheduling or evaluation order.
class RngStream {
  public:
    RngStream(uint64_t master_seed, std::string_view label);

    double uniform();                              // [0, 1)
    double normal(double mean, double sigma);
    int64_t binomial(int64_t trials, double p);
    uint64_t uniform_below(uint64_t bound);        // [0, bound)

    std::mt19937_64& engine() { return engine_; }
    const std::string& label() const { return label_; }

    /// Derive a further child stream ("<label>/<sub>").
    RngStream child(std::string_view sub) const;

  private:
    RngStream(uint64_t mixed_seed, std::string label, int);

    uint64_t master_;
    std::string label_;
    std::mt19937_64 engine_;
};

}  // namespace qshuttle
