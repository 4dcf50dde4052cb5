#include "wctt/analysis.hpp"

#include <algorithm>

#include "wctt/errors.hpp"

namespace wctt {

Picoseconds sigma_pre(const PathDecomposition& d, const PlatformConfig& cfg) {
  const auto pre = static_cast<std::int64_t>(d.pre_cd);
  return pre * cfg.link_delay + std::max<std::int64_t>(0, pre - 1) * cfg.router_delay;
}

Picoseconds sigma_post(const PathDecomposition& d, const PlatformConfig& cfg) {
  return static_cast<std::int64_t>(d.post_cd) * cfg.link_delay;
}

InterferenceTerm interference_term(std::size_t higher, std::size_t lower, const FlowSet& fs) {
  const auto d = decompose(fs.path(higher), fs.path(lower));
  if (!d)
    throw ModelViolation("flows " + std::to_string(fs.flow(higher).id) + " and " +
                         std::to_string(fs.flow(lower).id) + " do not contend");

  const auto& cfg = fs.platform();
  InterferenceTerm t;
  t.higher_flow = fs.flow(higher).id;
  t.lower_flow = fs.flow(lower).id;
  t.decomposition = *d;
  t.full_C = basic_latency(fs.path(higher).size(), fs.flow(higher).size, cfg);
  t.sigma_pre = sigma_pre(*d, cfg);
  t.sigma_post = sigma_post(*d, cfg);
  t.tight_I = t.full_C - t.sigma_pre - t.sigma_post;
  return t;
}

FixedPoint solve_fixed_point(Picoseconds base, Picoseconds deadline, std::span<const Interferer> interferers,
                             std::vector<Picoseconds>* trace) {
  FixedPoint fp;
  fp.value = base;
  if (trace) trace->push_back(base);
  if (base > deadline) return fp;

  for (;;) {
    Picoseconds next = base;
    for (const auto& j : interferers) next += ceil_div(fp.value + j.jitter, j.period) * j.cost;
    ++fp.iterations;
    if (trace) trace->push_back(next);
    if (next == fp.value) {
      fp.converged = true;
      return fp;
    }
    fp.value = next;
    if (next > deadline) return fp;
  }
}

namespace {

struct Interference {
  std::size_t higher;
  InterferenceTerm term;
};

std::vector<Interference> interferences_of(std::size_t i, const FlowSet& fs) {
  std::vector<Interference> out;
  for (auto j : direct_interference_set(i, fs)) out.push_back({j, interference_term(j, i, fs)});
  return out;
}

std::vector<Interferer> recurrence_terms(const FlowSet& fs, std::span<const Interference> terms, Method method,
                                         std::span<const FlowJitter> jitters) {
  std::vector<Interferer> out;
  out.reserve(terms.size());
  for (const auto& t : terms) {
    const auto& jit = jitters[t.higher];
    out.push_back({fs.flow(t.higher).period, jit.release + jit.interference,
                   method == Method::classic ? t.term.full_C : t.term.tight_I});
  }
  return out;
}

// f_j carries indirect interference into f_i when one of f_j's own direct
// interferers does not touch f_i's path.
bool has_indirect(std::size_t j, std::size_t i, const FlowSet& fs,
                  const std::vector<std::vector<std::size_t>>& direct) {
  return std::any_of(direct[j].begin(), direct[j].end(),
                     [&](std::size_t k) { return k != i && !fs.share_link(k, i); });
}

std::vector<FlowJitter> jitters_for(std::size_t i, const FlowSet& fs, JitterPolicy policy,
                                    std::span<const Interference> terms, const std::vector<std::vector<std::size_t>>& direct,
                                    const std::vector<FixedPoint>& responses, const std::vector<Picoseconds>& basic) {
  std::vector<FlowJitter> out(fs.size());
  for (const auto& t : terms) {
    out[t.higher].release = fs.flow(t.higher).release_jitter;
    if (policy == JitterPolicy::shi_burns && has_indirect(t.higher, i, fs, direct))
      out[t.higher].interference = responses[t.higher].value - basic[t.higher];
  }
  return out;
}

std::int64_t preemptions(Picoseconds response, const Interferer& j) {
  return ceil_div(response + j.jitter, j.period);
}

}  // namespace

FixedPoint fixed_point_wctt(std::size_t i, const FlowSet& fs, Method method, std::span<const FlowJitter> jitters,
                            std::vector<Picoseconds>* trace) {
  if (jitters.size() != fs.size()) throw ConfigError("jitter table does not match the flow-set size");
  const auto terms = interferences_of(i, fs);
  const auto rec = recurrence_terms(fs, terms, method, jitters);
  return solve_fixed_point(basic_latency(fs.path(i).size(), fs.flow(i).size, fs.platform()), fs.flow(i).deadline,
                           rec, trace);
}

bool AnalysisResult::schedulable(Method m) const {
  return std::all_of(flows.begin(), flows.end(), [m](const FlowAnalysis& f) {
    return m == Method::classic ? f.schedulable_classic : f.schedulable_tight;
  });
}

const FlowAnalysis& AnalysisResult::by_id(FlowId id) const {
  for (const auto& f : flows)
    if (f.id == id) return f;
  throw ConfigError("no analysis record for flow " + std::to_string(id));
}

namespace {

struct Context {
  std::vector<std::vector<std::size_t>> direct;
  std::vector<std::vector<Interference>> terms;
  std::vector<Picoseconds> basic;
};

Context build_context(const FlowSet& fs) {
  Context ctx;
  ctx.direct.reserve(fs.size());
  ctx.terms.reserve(fs.size());
  ctx.basic.reserve(fs.size());
  for (std::size_t i = 0; i < fs.size(); ++i) {
    ctx.terms.push_back(interferences_of(i, fs));
    std::vector<std::size_t> d;
    for (const auto& t : ctx.terms.back()) d.push_back(t.higher);
    ctx.direct.push_back(std::move(d));
    ctx.basic.push_back(basic_latency(fs.path(i).size(), fs.flow(i).size, fs.platform()));
  }
  return ctx;
}

}  // namespace

AnalysisResult analyze_flowset(const FlowSet& fs, const AnalysisOptions& options) {
  const auto ctx = build_context(fs);
  const auto order = fs.by_priority();

  std::vector<FixedPoint> classic(fs.size());
  std::vector<FixedPoint> tight(fs.size());
  AnalysisResult result;
  result.flows.resize(fs.size());

  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const auto i = order[rank];
    const auto& flow = fs.flow(i);
    const auto& terms = ctx.terms[i];

    const auto jit_c = jitters_for(i, fs, options.jitter, terms, ctx.direct, classic, ctx.basic);
    const auto jit_t = jitters_for(i, fs, options.jitter, terms, ctx.direct,
                                   options.jitter_source == JitterSource::classic ? classic : tight, ctx.basic);
    const auto rec_c = recurrence_terms(fs, terms, Method::classic, jit_c);
    const auto rec_t = recurrence_terms(fs, terms, Method::tight, jit_t);

    classic[i] = solve_fixed_point(ctx.basic[i], flow.deadline, rec_c);
    tight[i] = solve_fixed_point(ctx.basic[i], flow.deadline, rec_t);

    auto& fa = result.flows[i];
    fa.id = flow.id;
    fa.index = i;
    fa.priority_rank = rank + 1;
    fa.C = ctx.basic[i];
    fa.classic = classic[i];
    fa.tight = tight[i];
    fa.schedulable_classic = classic[i].converged && classic[i].value <= flow.deadline;
    fa.schedulable_tight = tight[i].converged && tight[i].value <= flow.deadline;
    if (classic[i].converged && tight[i].converged) {
      fa.improvement_abs = classic[i].value - tight[i].value;
      fa.improvement_rel =
          static_cast<double>(fa.improvement_abs->count()) / static_cast<double>(classic[i].value.count());
    }
    for (std::size_t k = 0; k < terms.size(); ++k) {
      const auto j = terms[k].higher;
      fa.interferers.push_back({terms[k].term, jit_c[j].interference, jit_t[j].interference,
                                preemptions(classic[i].value, rec_c[k]), preemptions(tight[i].value, rec_t[k])});
    }
  }
  return result;
}

bool classic_schedulable(const FlowSet& fs, JitterPolicy policy) {
  const auto ctx = build_context(fs);
  std::vector<FixedPoint> classic(fs.size());
  for (auto i : fs.by_priority()) {
    const auto jit = jitters_for(i, fs, policy, ctx.terms[i], ctx.direct, classic, ctx.basic);
    classic[i] = solve_fixed_point(ctx.basic[i], fs.flow(i).deadline,
                                   recurrence_terms(fs, ctx.terms[i], Method::classic, jit));
    if (!classic[i].converged) return false;
  }
  return true;
}

std::string to_string(Method m) { return m == Method::classic ? "classic" : "tight"; }

std::string to_string(JitterPolicy p) { return p == JitterPolicy::zero ? "zero" : "shi-burns"; }

}  // namespace wctt
