#include "wctt/simulator.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <string>

#include "wctt/errors.hpp"

namespace wctt {

Cycle hyper_period_cycles(const FlowSet& fs) {
  const auto clock = fs.platform().clock_period;
  Cycle h = 1;
  for (const auto& f : fs.flows()) {
    if (f.period % clock != Picoseconds::zero())
      throw ConfigError("flow " + std::to_string(f.id) + ": period is not a whole number of cycles");
    const Cycle p = f.period / clock;
    const Cycle step = p / std::gcd(h, p);
    if (h > std::numeric_limits<Cycle>::max() / 4 / step)
      throw ConfigError("hyper-period does not fit in 64-bit cycles; quantise the periods");
    h *= step;
  }
  return h;
}

namespace {

constexpr Cycle kNone = -1;

struct Packet {
  std::size_t flow = 0;
  std::uint64_t seq = 0;
  std::int64_t priority = 0;
  Cycle release = 0;
  std::uint32_t flits = 0;
  const std::vector<LinkId>* links = nullptr;

  // Per hop h (the h-th link of the path):
  std::vector<std::uint32_t> sent;     // flits that started crossing link h
  std::vector<std::uint32_t> arrived;  // flits that finished crossing link h
  std::vector<Cycle> in_transit;       // arrival cycle of the flit on link h
  std::vector<Cycle> header_arrival;   // header arrival downstream of link h
  std::vector<std::uint32_t> credits;  // free slots in the VC downstream of link h
  std::vector<std::deque<Cycle>> pending_credits;
  std::vector<char> vc_held;

  std::size_t hops() const { return links->size(); }
  bool ejection(std::size_t h) const { return h + 1 == hops(); }
};

struct Release {
  Cycle time;
  std::size_t flow;
  bool operator>(const Release& o) const { return time != o.time ? time > o.time : flow > o.flow; }
};

class Network {
 public:
  Network(const FlowSet& fs, const SimConfig& cfg) : fs_(fs), cfg_(cfg) {
    const auto& p = fs.platform();
    p.validate();
    if (cfg.vc_depth < 1) throw ConfigError("virtual-channel depth must be at least one flit");
    if (cfg.credit_delay < 1) throw ConfigError("credit delay must be at least one cycle");
    if (cfg.vcs_per_port && *cfg.vcs_per_port < 1) throw ConfigError("need at least one VC per port");

    link_cycles_ = p.link_cycles();
    router_cycles_ = p.router_cycles();
    clock_ = p.clock_period;

    horizon_ = std::visit(
        [&](const auto& h) -> Cycle {
          using H = std::decay_t<decltype(h)>;
          if constexpr (std::is_same_v<H, HyperPeriods>) {
            const auto hp = hyper_period_cycles(fs);
            if (h.count != 0 && static_cast<std::uint64_t>(hp) > static_cast<std::uint64_t>(
                                                                     std::numeric_limits<Cycle>::max() / 4) /
                                                                     h.count)
              throw ConfigError("simulation horizon overflows");
            return hp * static_cast<Cycle>(h.count);
          } else {
            if (h.count < 0) throw ConfigError("negative simulation horizon");
            return h.count;
          }
        },
        cfg.horizon);

    const auto n = fs.size();
    routes_.resize(n);
    periods_.resize(n);
    jitter_cycles_.resize(n);
    flits_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& f = fs.flow(i);
      for (const auto& l : fs.path(i).links()) routes_[i].push_back(link_id(l, p));
      if (f.period % clock_ != Picoseconds::zero())
        throw ConfigError("flow " + std::to_string(f.id) + ": period is not a whole number of cycles");
      periods_[i] = f.period / clock_;
      jitter_cycles_[i] = f.release_jitter / clock_;
      flits_[i] = static_cast<std::uint32_t>(ceil_div<std::uint64_t>(f.size, p.flit_size)) + 1;
    }

    link_busy_until_.assign(link_id_count(p), 0);
    last_grant_.assign(link_id_count(p), kNone);
    vcs_in_use_.assign(link_id_count(p), 0);
    best_.assign(link_id_count(p), kNoCandidate);

    seed_releases();
  }

  SimTrace run() {
    SimTrace trace;
    trace.flows.resize(fs_.size());
    for (std::size_t i = 0; i < fs_.size(); ++i) trace.flows[i].flow_id = fs_.flow(i).id;
    std::vector<std::vector<Picoseconds>> latencies(fs_.size());

    Cycle t = 0;
    while (t < horizon_) {
      if (active_.empty()) {
        if (releases_.empty() || releases_.top().time >= horizon_) break;
        t = std::max(t, releases_.top().time);
      }
      release_packets(t);
      deliver(t, trace, latencies);
      arbitrate(t);
      std::erase_if(active_, [](const Packet& pk) { return pk.arrived.back() == pk.flits; });
      if (cfg_.check_invariants) check(t);
      ++t;
    }

    for (const auto& pk : active_) {
      ++trace.flows[pk.flow].censored;
      ++counters_.packets_censored;
      counters_.flits_not_injected += pk.flits - pk.sent.front();
      counters_.flits_in_network += pk.sent.front() - pk.arrived.back();
    }

    for (std::size_t i = 0; i < fs_.size(); ++i) {
      auto& s = trace.flows[i];
      const auto& lat = latencies[i];
      s.completed = lat.size();
      if (lat.empty()) continue;
      s.min = *std::min_element(lat.begin(), lat.end());
      s.max = *std::max_element(lat.begin(), lat.end());
      long double sum = 0;
      for (auto v : lat) sum += static_cast<long double>(v.count());
      s.avg_ps = static_cast<double>(sum / static_cast<long double>(lat.size()));
    }
    trace.horizon = horizon_ * clock_;
    trace.counters = counters_;
    return trace;
  }

 private:
  static constexpr std::size_t kNoCandidate = std::numeric_limits<std::size_t>::max();

  void seed_releases() {
    const auto n = fs_.size();
    offsets_.assign(n, 0);
    const auto& rel = cfg_.release;
    if (rel.kind == ReleaseKind::synchronous && !rel.offsets.empty()) {
      if (rel.offsets.size() != n) throw ConfigError("release offsets do not match the flow-set size");
      for (std::size_t i = 0; i < n; ++i) {
        if (rel.offsets[i] < 0) throw ConfigError("release offsets must be non-negative");
        offsets_[i] = rel.offsets[i];
      }
    } else if (rel.kind == ReleaseKind::phased) {
      std::mt19937_64 rng(rel.seed);
      for (std::size_t i = 0; i < n; ++i)
        offsets_[i] = std::uniform_int_distribution<Cycle>(0, periods_[i] - 1)(rng);
    }

    jitter_rng_.clear();
    for (std::size_t i = 0; i < n; ++i) {
      std::seed_seq seq{static_cast<std::uint32_t>(rel.seed), static_cast<std::uint32_t>(rel.seed >> 32),
                        static_cast<std::uint32_t>(i)};
      jitter_rng_.emplace_back(seq);
    }
    next_index_.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) schedule_next(i);
  }

  // `not_before` keeps jittered releases of one flow in order when J^R > T.
  void schedule_next(std::size_t i, Cycle not_before = 0) {
    const auto k = next_index_[i]++;
    Cycle at = offsets_[i] + static_cast<Cycle>(k) * periods_[i];
    if (cfg_.release.kind == ReleaseKind::jittered && jitter_cycles_[i] > 0)
      at += std::uniform_int_distribution<Cycle>(0, jitter_cycles_[i])(jitter_rng_[i]);
    at = std::max(at, not_before);
    if (at < horizon_) releases_.push({at, i});
  }

  void release_packets(Cycle t) {
    while (!releases_.empty() && releases_.top().time == t) {
      const auto i = releases_.top().flow;
      releases_.pop();
      schedule_next(i, t);

      Packet pk;
      pk.flow = i;
      pk.seq = next_seq_++;
      pk.priority = fs_.flow(i).priority;
      pk.release = t;
      pk.flits = flits_[i];
      pk.links = &routes_[i];
      const auto h = routes_[i].size();
      pk.sent.assign(h, 0);
      pk.arrived.assign(h, 0);
      pk.in_transit.assign(h, kNone);
      pk.header_arrival.assign(h, kNone);
      pk.credits.assign(h, 0);
      pk.pending_credits.resize(h);
      pk.vc_held.assign(h, 0);
      active_.push_back(std::move(pk));
      ++counters_.packets_released;
    }
  }

  void deliver(Cycle t, SimTrace& trace, std::vector<std::vector<Picoseconds>>& latencies) {
    for (auto& pk : active_) {
      for (std::size_t h = 0; h < pk.hops(); ++h) {
        if (pk.in_transit[h] == t) {
          pk.in_transit[h] = kNone;
          if (pk.arrived[h]++ == 0) pk.header_arrival[h] = t;
          if (pk.ejection(h)) {
            ++counters_.flits_ejected;
            if (pk.arrived[h] == pk.flits) {
              const auto latency = (t - pk.release) * clock_;
              trace.packets.push_back({fs_.flow(pk.flow).id, pk.release * clock_, t * clock_, latency});
              latencies[pk.flow].push_back(latency);
              ++counters_.packets_completed;
            }
          }
        }
        auto& pc = pk.pending_credits[h];
        while (!pc.empty() && pc.front() <= t) {
          pc.pop_front();
          ++pk.credits[h];
        }
      }
    }
  }

  bool ready(const Packet& pk, std::size_t h, Cycle t) const {
    const auto k = pk.sent[h];
    if (k >= pk.flits) return false;
    if (h > 0 && pk.arrived[h - 1] <= k) return false;
    if (k == 0) {
      const Cycle at = h == 0 ? pk.release : pk.header_arrival[h - 1] + router_cycles_;
      if (t < at) return false;
      if (!pk.ejection(h) && cfg_.vcs_per_port && vcs_in_use_[(*pk.links)[h]] >= *cfg_.vcs_per_port)
        throw ModelViolation("virtual channels exhausted on link " + std::to_string((*pk.links)[h]) +
                             " at cycle " + std::to_string(t));
      return true;
    }
    return pk.ejection(h) || pk.credits[h] > 0;
  }

  bool outranks(const Packet& a, const Packet& b) const {
    if (a.priority != b.priority) return a.priority > b.priority;
    return a.seq < b.seq;
  }

  void arbitrate(Cycle t) {
    touched_.clear();
    for (std::size_t p = 0; p < active_.size(); ++p) {
      const auto& pk = active_[p];
      for (std::size_t h = 0; h < pk.hops(); ++h) {
        const auto link = (*pk.links)[h];
        if (link_busy_until_[link] > t || !ready(pk, h, t)) continue;
        auto& best = best_[link];
        if (best == kNoCandidate) {
          touched_.push_back(link);
          best = p;
        } else if (outranks(pk, active_[best])) {
          best = p;
        }
      }
    }

    for (const auto link : touched_) {
      auto& pk = active_[best_[link]];
      best_[link] = kNoCandidate;
      std::size_t h = 0;
      while ((*pk.links)[h] != link) ++h;
      send(pk, h, t);
    }
  }

  void send(Packet& pk, std::size_t h, Cycle t) {
    const auto link = (*pk.links)[h];
    if (cfg_.check_invariants && last_grant_[link] == t)
      throw ModelViolation("two flits granted on one link in cycle " + std::to_string(t));
    last_grant_[link] = t;

    if (!pk.ejection(h)) {
      if (pk.sent[h] == 0) {
        pk.vc_held[h] = 1;
        pk.credits[h] = cfg_.vc_depth;
        ++vcs_in_use_[link];
      }
      --pk.credits[h];
    }
    ++pk.sent[h];
    pk.in_transit[h] = t + link_cycles_;
    link_busy_until_[link] = t + link_cycles_;

    if (h == 0) {
      ++counters_.flits_injected;
    } else {
      pk.pending_credits[h - 1].push_back(t + cfg_.credit_delay);
      if (pk.sent[h] == pk.flits) {
        pk.vc_held[h - 1] = 0;
        --vcs_in_use_[(*pk.links)[h - 1]];
      }
    }
  }

  void check(Cycle t) const {
    std::uint64_t in_network = 0;
    for (const auto& pk : active_) {
      in_network += pk.sent.front() - pk.arrived.back();
      for (std::size_t h = 0; h + 1 < pk.hops(); ++h) {
        const auto occupied = pk.sent[h] - pk.sent[h + 1];
        if (occupied > cfg_.vc_depth)
          throw ModelViolation("VC buffer overflow at cycle " + std::to_string(t));
        if (pk.vc_held[h]) {
          const auto free = pk.credits[h] + pk.pending_credits[h].size();
          if (free + occupied != cfg_.vc_depth)
            throw ModelViolation("credit accounting mismatch at cycle " + std::to_string(t));
        }
        if ((pk.sent[h] > 0 && pk.sent[h + 1] < pk.flits) != static_cast<bool>(pk.vc_held[h]))
          throw ModelViolation("packet does not hold exactly one VC on a traversed port");
      }
    }
    if (counters_.flits_injected != counters_.flits_ejected + in_network)
      throw ModelViolation("flit conservation violated at cycle " + std::to_string(t));
  }

  const FlowSet& fs_;
  const SimConfig& cfg_;
  Cycle link_cycles_ = 1;
  Cycle router_cycles_ = 1;
  Picoseconds clock_{1};
  Cycle horizon_ = 0;

  std::vector<std::vector<LinkId>> routes_;
  std::vector<Cycle> periods_;
  std::vector<Cycle> jitter_cycles_;
  std::vector<std::uint32_t> flits_;
  std::vector<Cycle> offsets_;
  std::vector<std::mt19937_64> jitter_rng_;
  std::vector<std::uint64_t> next_index_;
  std::priority_queue<Release, std::vector<Release>, std::greater<>> releases_;

  std::deque<Packet> active_;
  std::uint64_t next_seq_ = 0;

  std::vector<Cycle> link_busy_until_;
  std::vector<Cycle> last_grant_;
  std::vector<std::uint32_t> vcs_in_use_;
  std::vector<std::size_t> best_;
  std::vector<LinkId> touched_;

  SimCounters counters_;
};

}  // namespace

SimTrace simulate(const FlowSet& fs, const SimConfig& cfg) { return Network(fs, cfg).run(); }

}  // namespace wctt
