// Copyright 2026 The autoguide Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace autoguide::sim {

struct StepResult {
    std::string observation;
    double reward = 0.0;
    bool done = false;
};

/// Text environment with a reset/step interface. Instances are single-threaded.
class Environment {
public:
    virtual ~Environment() = default;

    virtual std::string reset(std::uint64_t seed = 0) = 0;
    /// Throws StepAfterDone once the episode has ended.
    virtual StepResult step(std::string_view action) = 0;

    virtual const std::string& observation() const = 0;
    virtual bool done() const = 0;
    virtual double accumulated_reward() const = 0;
    virtual bool success() const = 0;
    virtual const std::string& task_id() const = 0;
    virtual const std::string& instruction() const = 0;
};

inline constexpr std::string_view kInvalidAction = "Invalid action.";

/// mt19937_64 with draws that do not depend on the standard library's distributions,
/// so generated data is identical across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, n); n > 0.
    std::size_t index(std::size_t n) {
        const auto bound = static_cast<std::uint64_t>(n);
        const auto limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return static_cast<std::size_t>(x % bound);
    }

    bool coin() { return index(2) == 1; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
    }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[index(v.size())];
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace autoguide::sim
