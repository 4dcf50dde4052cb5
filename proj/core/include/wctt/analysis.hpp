#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wctt/flow.hpp"
#include "wctt/platform.hpp"
#include "wctt/units.hpp"

namespace wctt {

/// classic: every preemption costs the interferer's full C_j.
/// tight: every preemption costs C_j minus the header's pre-CD traversal
/// and the tail's post-CD traversal.
enum class Method { classic, tight };

enum class JitterPolicy {
  zero,       // J^I = 0 for every interferer
  shi_burns,  // J^I_j = R_j - C_j when f_j suffers interference the analysed flow does not see
};

/// Which response times feed J^I in tight mode.
enum class JitterSource {
  mode_consistent,  // tight mode uses R*_j, classic uses R_j
  classic,          // both modes use R_j
};

struct AnalysisOptions {
  JitterPolicy jitter = JitterPolicy::zero;
  JitterSource jitter_source = JitterSource::mode_consistent;
};

/// Header traversal of the pre-CD section: |pre| d_l + max(0, |pre|-1) d_r.
Picoseconds sigma_pre(const PathDecomposition& d, const PlatformConfig& cfg);
/// Tail traversal of the post-CD section: |post| d_l.
Picoseconds sigma_post(const PathDecomposition& d, const PlatformConfig& cfg);

/// Per-preemption interference of `higher_flow` on `lower_flow`.
struct InterferenceTerm {
  FlowId higher_flow = 0;
  FlowId lower_flow = 0;
  PathDecomposition decomposition;
  Picoseconds full_C{0};
  Picoseconds sigma_pre{0};
  Picoseconds sigma_post{0};
  Picoseconds tight_I{0};

  /// sigma_pre + sigma_post, i.e. C - I.
  Picoseconds saving() const { return sigma_pre + sigma_post; }
};

/// Throws ModelViolation when the two flows share no link.
InterferenceTerm interference_term(std::size_t higher, std::size_t lower, const FlowSet& fs);

/// One higher-priority contributor to a response-time recurrence.
struct Interferer {
  Picoseconds period{0};
  Picoseconds jitter{0};  // J^R + J^I
  Picoseconds cost{0};    // charged per preemption
};

struct FixedPoint {
  Picoseconds value{0};  // fixed point, or the first iterate above the deadline
  bool converged = false;
  std::uint32_t iterations = 0;
};

/// Least fixed point of R = base + sum ceil((R + J_j)/T_j) X_j seeded at
/// R = base. Stops as soon as an iterate exceeds `deadline`.
FixedPoint solve_fixed_point(Picoseconds base, Picoseconds deadline, std::span<const Interferer> interferers,
                             std::vector<Picoseconds>* trace = nullptr);

/// Release and interference jitter of one flow, as seen by the flow under analysis.
struct FlowJitter {
  Picoseconds release{0};
  Picoseconds interference{0};
};

/// WCTT of flow `i`. `jitters` is indexed like `fs.flows()`.
FixedPoint fixed_point_wctt(std::size_t i, const FlowSet& fs, Method method, std::span<const FlowJitter> jitters,
                            std::vector<Picoseconds>* trace = nullptr);

struct InterferenceRecord {
  InterferenceTerm term;
  Picoseconds interference_jitter_classic{0};
  Picoseconds interference_jitter_tight{0};
  std::int64_t preemptions_classic = 0;  // ceil((R + J)/T) at the final iterate
  std::int64_t preemptions_tight = 0;
};

struct FlowAnalysis {
  FlowId id = 0;
  std::size_t index = 0;
  std::size_t priority_rank = 0;  // 1 = highest priority in the set
  Picoseconds C{0};
  FixedPoint classic;
  FixedPoint tight;
  bool schedulable_classic = false;
  bool schedulable_tight = false;
  std::optional<Picoseconds> improvement_abs;  // only when both converge
  std::optional<double> improvement_rel;
  std::vector<InterferenceRecord> interferers;
};

struct AnalysisResult {
  std::vector<FlowAnalysis> flows;  // in flow-set order

  bool schedulable(Method m) const;
  const FlowAnalysis& by_id(FlowId id) const;
};

/// Analyses every flow in descending priority order under both methods.
AnalysisResult analyze_flowset(const FlowSet& fs, const AnalysisOptions& options = {});

/// Classic analysis only; cheaper, used for period rescaling.
bool classic_schedulable(const FlowSet& fs, JitterPolicy policy);

std::string to_string(Method m);
std::string to_string(JitterPolicy p);

}  // namespace wctt
