#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <complex>
#include <cstdint>
#include <string>

namespace gridforest {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Conductor phase of a three-phase AC system.
enum class Phase : uint8_t { A = 0, B = 1, C = 2 };

inline constexpr std::array<Phase, 3> kAllPhases{Phase::A, Phase::B, Phase::C};

inline char phase_char(Phase p) {
    switch (p) {
        case Phase::A: return 'a';
        case Phase::B: return 'b';
        default: return 'c';
    }
}

/// Non-empty subset of {a, b, c}, stored as a 3-bit mask.
class PhaseSet {
  public:
    PhaseSet() = default;
    explicit PhaseSet(uint8_t mask) : mask_(mask & 0x7) {}

    static PhaseSet all() { return PhaseSet{0x7}; }
    static PhaseSet single(Phase p) { return PhaseSet{static_cast<uint8_t>(1u << static_cast<int>(p))}; }

    void add(Phase p) { mask_ |= (1u << static_cast<int>(p)); }
    bool contains(Phase p) const { return mask_ & (1u << static_cast<int>(p)); }
    bool contains_all(PhaseSet other) const { return (mask_ & other.mask_) == other.mask_; }
    bool empty() const { return mask_ == 0; }
    int count() const { return (mask_ & 1) + ((mask_ >> 1) & 1) + ((mask_ >> 2) & 1); }
    uint8_t mask() const { return mask_; }

    /// Canonical string form, e.g. "abc" or "b".
    std::string to_string() const {
        std::string s;
        for (Phase p : kAllPhases)
            if (contains(p)) s.push_back(phase_char(p));
        return s;
    }

    static PhaseSet from_string(const std::string& s) {
        PhaseSet ps;
        for (char c : s) {
            if (c == 'a') ps.add(Phase::A);
            else if (c == 'b') ps.add(Phase::B);
            else if (c == 'c') ps.add(Phase::C);
        }
        return ps;
    }

    bool operator==(const PhaseSet&) const = default;

  private:
    uint8_t mask_ = 0;
};

/// Fixed-size per-phase container indexed by Phase.
template <typename T>
struct PerPhase {
    std::array<T, 3> v{};

    T& operator[](Phase p) { return v[static_cast<size_t>(p)]; }
    const T& operator[](Phase p) const { return v[static_cast<size_t>(p)]; }

    T sum() const { return v[0] + v[1] + v[2]; }

    bool operator==(const PerPhase&) const = default;
};

/// Identifies one physical line: an edge index into the network's edge list
/// plus the line's k value within that edge.
struct LineRef {
    int edge = -1;
    int k = 0;

    auto operator<=>(const LineRef&) const = default;
};

/// Nominal root voltage for a phase: 1 p.u. at 0 / -120 / +120 degrees.
inline Complex nominal_voltage(Phase p) {
    switch (p) {
        case Phase::A: return Complex{1.0, 0.0};
        case Phase::B: return std::polar(1.0, -2.0 * kPi / 3.0);
        default: return std::polar(1.0, 2.0 * kPi / 3.0);
    }
}

}  // namespace gridforest
