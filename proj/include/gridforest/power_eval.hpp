#pragma once

#include <array>
#include <string>
#include <vector>

#include "gridforest/network.hpp"
#include "gridforest/radial.hpp"

namespace gridforest {

inline constexpr double kSweepTolerance = 1e-8;   // p.u. complex-power mismatch
inline constexpr int kSweepMaxIterations = 50;
inline constexpr double kFeasibilityTolerance = 1e-6;  // p.u.

/// One selected line's solved state, oriented parent -> child.
struct LineFlow {
    LineRef line;
    int parent_bus = -1;
    int child_bus = -1;
    PerPhase<Complex> current{};     // p.u., parent -> child
    PerPhase<Complex> flow_send{};   // complex power at the sending (parent) end
    PerPhase<Complex> flow_recv{};   // at the receiving (child) end
};

struct PowerFlowSolution {
    std::vector<PerPhase<Complex>> voltage;  // bus idx -> per-phase phasor
    std::vector<LineFlow> flows;             // ordered as config.selected
    bool converged = false;
    int iterations = 0;
    double max_mismatch_pu = 0.0;
    double total_loss_kw = 0.0;      // physical sum of R |I|^2
    double total_supplied_kw = 0.0;  // real power injected at the roots

    const LineFlow* find_flow(LineRef ref) const {
        for (const auto& f : flows)
            if (f.line == ref) return &f;
        return nullptr;
    }
};

enum class ConstraintFamily { Balance, Ohm, Voltage, LineP, LineQ, NodeP, NodeQ, Angle };

inline constexpr std::array<ConstraintFamily, 8> kAllFamilies{
    ConstraintFamily::Balance, ConstraintFamily::Ohm,   ConstraintFamily::Voltage,
    ConstraintFamily::LineP,   ConstraintFamily::LineQ, ConstraintFamily::NodeP,
    ConstraintFamily::NodeQ,   ConstraintFamily::Angle};

const char* constraint_family_name(ConstraintFamily f);

struct FeasibilityReport {
    struct Entry {
        double worst_violation = 0.0;
        std::string element;
    };
    std::array<Entry, 8> entries{};
    double total_violation = 0.0;  // sum over all checked elements
    bool feasible = true;
    double tolerance = kFeasibilityTolerance;

    Entry& entry(ConstraintFamily f) { return entries[static_cast<size_t>(f)]; }
    const Entry& entry(ConstraintFamily f) const { return entries[static_cast<size_t>(f)]; }
};

/// Backward-forward sweep on an oriented radial forest. Roots are held at the
/// nominal per-phase voltages; each iteration accumulates load currents up the
/// trees and propagates voltage drops back down, until the worst per-bus
/// complex-power mismatch falls under kSweepTolerance. Non-convergence is
/// reported on the solution, not thrown.
PowerFlowSolution sweep_power_flow(const DistributionNetwork& net, const OrientedForest& forest,
                                   const std::vector<int>& active_set);

/// Objective-form loss of a converged solution, in kW:
/// sum over selected lines and phases of R |x|^2 cos^2(theta).
double exact_loss_kw(const PowerFlowSolution& solution, const DistributionNetwork& net);

/// Voltage-free loss approximation, in kW: per line, R^3/Z^2 times the squared
/// per-phase real and reactive demand carried by that line, attributing each
/// bus's demand to every line on its root path. Requires a radial config.
double approx_loss_kw(const DistributionNetwork& net, const RadialConfiguration& config);

/// Same quadratic form evaluated by downstream accumulation on a forest that
/// need not span the network; equals approx_loss_kw on complete forests.
double surrogate_loss_kw(const DistributionNetwork& net, const RadialConfiguration& partial);

/// Evaluate constraint families (2b)-(2i) against a converged solution.
/// Capacity and angle limits apply to selected lines only; injection bounds
/// apply at the active roots.
FeasibilityReport check_feasibility(const DistributionNetwork& net, const RadialConfiguration& config,
                                    const OrientedForest& forest, const PowerFlowSolution& solution);

}  // namespace gridforest
