#include "cascade_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "linsolve.hpp"

namespace oracle {

namespace {

using hfsim::Branch;
using hfsim::ElementKind;
using hfsim::ElementRef;
using hfsim::GridCase;
using hfsim::cascade::LatentFailure;
namespace relay = hfsim::relay;

// Buses reachable from each other through closed branches.
std::vector<std::vector<int>> bus_groups(const GridCase& c, const std::set<int>& open) {
    std::map<int, std::vector<int>> next;
    for (const auto& b : c.buses) next[b.id];
    for (const auto& br : c.branches) {
        if (!br.in_service || open.count(br.id)) continue;
        next[br.from_bus].push_back(br.to_bus);
        next[br.to_bus].push_back(br.from_bus);
    }
    std::set<int> seen;
    std::vector<std::vector<int>> groups;
    for (const auto& b : c.buses) {
        if (!seen.insert(b.id).second) continue;
        std::vector<int> group;
        std::vector<int> stack{b.id};
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            group.push_back(u);
            for (int v : next[u])
                if (seen.insert(v).second) stack.push_back(v);
        }
        std::sort(group.begin(), group.end());
        groups.push_back(std::move(group));
    }
    return groups;
}

// Proportional redispatch with pro-rata shedding, island by island.
void balance(const GridCase& c, const std::set<int>& open, std::vector<double>& served,
             std::vector<double>& dispatch) {
    for (const auto& group : bus_groups(c, open)) {
        std::set<int> in(group.begin(), group.end());
        double load = 0.0, cap = 0.0;
        for (std::size_t i = 0; i < c.loads.size(); ++i)
            if (in.count(c.loads[i].bus)) load += served[i];
        for (std::size_t i = 0; i < c.generators.size(); ++i)
            if (in.count(c.generators[i].bus)) cap += c.generators[i].p_max_mw;
        if (cap <= 1e-9) {
            if (load > 1e-9)
                for (std::size_t i = 0; i < c.loads.size(); ++i)
                    if (in.count(c.loads[i].bus)) served[i] = 0.0;
            for (std::size_t i = 0; i < c.generators.size(); ++i)
                if (in.count(c.generators[i].bus)) dispatch[i] = 0.0;
            continue;
        }
        if (load > cap + 1e-9) {
            const double scale = cap / load;
            for (std::size_t i = 0; i < c.loads.size(); ++i)
                if (in.count(c.loads[i].bus)) served[i] *= scale;
            load = cap;
        }
        for (std::size_t i = 0; i < c.generators.size(); ++i)
            if (in.count(c.generators[i].bus))
                dispatch[i] = c.generators[i].p_max_mw * load / cap;
    }
}

// Per-island DC solution assembled from scratch and solved by elimination.
std::map<int, double> all_flows(const GridCase& c, const std::set<int>& open,
                                const std::vector<double>& served,
                                const std::vector<double>& dispatch) {
    std::map<int, double> flows;
    for (const auto& group : bus_groups(c, open)) {
        std::set<int> in(group.begin(), group.end());
        int ref = -1;
        for (int b : group) {
            const hfsim::Bus* bus = c.find_bus(b);
            if (bus && bus->slack) {
                ref = b;
                break;
            }
        }
        if (ref < 0)
            for (std::size_t i = 0; i < c.generators.size(); ++i)
                if (in.count(c.generators[i].bus) && c.generators[i].p_max_mw > 0.0)
                    ref = ref < 0 ? c.generators[i].bus : std::min(ref, c.generators[i].bus);
        if (ref < 0) {
            for (const auto& br : c.branches)
                if (br.in_service && !open.count(br.id) && in.count(br.from_bus))
                    flows[br.id] = 0.0;
            continue;
        }

        std::map<int, std::size_t> index;
        for (int b : group)
            if (b != ref) index[b] = index.size();
        const std::size_t n = index.size();
        std::vector<std::vector<double>> b_mat(n, std::vector<double>(n, 0.0));
        std::vector<double> p(n, 0.0);
        for (const auto& br : c.branches) {
            if (!br.in_service || open.count(br.id) || !in.count(br.from_bus)) continue;
            const double w = 1.0 / br.reactance;
            const int ends[2][2] = {{br.from_bus, br.to_bus}, {br.to_bus, br.from_bus}};
            for (const auto& e : ends) {
                auto row = index.find(e[0]);
                if (row == index.end()) continue;
                b_mat[row->second][row->second] += w;
                auto col = index.find(e[1]);
                if (col != index.end()) b_mat[row->second][col->second] -= w;
            }
        }
        for (std::size_t i = 0; i < c.generators.size(); ++i) {
            auto it = index.find(c.generators[i].bus);
            if (it != index.end()) p[it->second] += dispatch[i] / c.base_mw;
        }
        for (std::size_t i = 0; i < c.loads.size(); ++i) {
            auto it = index.find(c.loads[i].bus);
            if (it != index.end()) p[it->second] -= served[i] / c.base_mw;
        }

        std::map<int, double> theta;
        theta[ref] = 0.0;
        if (n > 0) {
            std::vector<double> x = solve_dense(b_mat, p);
            for (const auto& [bus, i] : index) theta[bus] = x[i];
        }
        for (const auto& br : c.branches) {
            if (!br.in_service || open.count(br.id) || !in.count(br.from_bus)) continue;
            flows[br.id] = c.base_mw * (theta[br.from_bus] - theta[br.to_bus]) / br.reactance;
        }
    }
    return flows;
}

// Element-graph neighbourhood: a branch borders its end buses and every
// closed branch sharing an end bus; a bus borders its closed branches and
// the buses across them.
std::vector<ElementRef> neighbours(const GridCase& c, ElementRef e) {
    std::vector<ElementRef> out;
    if (e.kind == ElementKind::BRANCH) {
        const Branch* br = c.find_branch(e.id);
        out.push_back({ElementKind::BUS, br->from_bus});
        out.push_back({ElementKind::BUS, br->to_bus});
        for (const auto& other : c.branches) {
            if (!other.in_service || other.id == e.id) continue;
            if (other.from_bus == br->from_bus || other.to_bus == br->from_bus ||
                other.from_bus == br->to_bus || other.to_bus == br->to_bus)
                out.push_back({ElementKind::BRANCH, other.id});
        }
    } else {
        for (const auto& br : c.branches) {
            if (!br.in_service) continue;
            if (br.from_bus != e.id && br.to_bus != e.id) continue;
            out.push_back({ElementKind::BRANCH, br.id});
            out.push_back({ElementKind::BUS, br.from_bus == e.id ? br.to_bus : br.from_bus});
        }
    }
    return out;
}

int element_hops(const GridCase& c, ElementRef a, ElementRef b) {
    if (a == b) return 0;
    std::map<ElementRef, int> dist{{a, 0}};
    std::vector<ElementRef> frontier{a};
    while (!frontier.empty()) {
        std::vector<ElementRef> next;
        for (const auto& u : frontier)
            for (const auto& v : neighbours(c, u)) {
                if (dist.count(v)) continue;
                dist[v] = dist[u] + 1;
                if (v == b) return dist[v];
                next.push_back(v);
            }
        frontier = std::move(next);
    }
    return -1;
}

int bus_hops(const GridCase& c, ElementRef from, int target) {
    std::map<int, int> dist;
    std::vector<int> frontier;
    auto seed = [&](int bus) {
        dist[bus] = 0;
        frontier.push_back(bus);
    };
    if (from.kind == ElementKind::BUS) {
        seed(from.id);
    } else {
        const Branch* br = c.find_branch(from.id);
        seed(br->from_bus);
        seed(br->to_bus);
    }
    while (!frontier.empty()) {
        std::vector<int> next;
        for (int u : frontier) {
            if (u == target) return dist[u];
            for (const auto& br : c.branches) {
                if (!br.in_service) continue;
                if (br.from_bus != u && br.to_bus != u) continue;
                const int v = br.from_bus == u ? br.to_bus : br.from_bus;
                if (dist.count(v)) continue;
                dist[v] = dist[u] + 1;
                next.push_back(v);
            }
        }
        frontier = std::move(next);
    }
    return dist.count(target) ? dist[target] : -1;
}

struct Run {
    const GridCase& c;
    std::set<int> open;
    std::set<int> faulted;
    std::vector<double> served;
    std::vector<double> dispatch;

    explicit Run(const GridCase& grid) : c(grid) {
        for (const auto& l : c.loads) served.push_back(l.p_mw);
        for (const auto& g : c.generators) dispatch.push_back(g.p_mw);
    }

    bool live(int id) const {
        const Branch* br = c.find_branch(id);
        return br && br->in_service && !open.count(id);
    }

    std::vector<int> at_bus(int bus) const {
        std::vector<int> ids;
        for (const auto& br : c.branches)
            if (live(br.id) && (br.from_bus == bus || br.to_bus == bus)) ids.push_back(br.id);
        return ids;
    }

    void isolate_bus(int bus) {
        for (int id : at_bus(bus)) open.insert(id);
    }

    relay::ComponentHealth health_of(const hfsim::ProtectionGroup& group,
                                     const std::vector<LatentFailure>& latents) const {
        relay::ComponentHealth h = group.health;
        for (const auto& lf : latents)
            if (lf.branch == group.branch) h.set(lf.component, lf.state);
        return h;
    }

    void clear_faults(const std::vector<ElementRef>& faults,
                      const std::vector<LatentFailure>& latents, bool relay_eval) {
        for (const auto& f : faults) {
            if (f.kind == ElementKind::BUS) {
                isolate_bus(f.id);
                continue;
            }
            if (!live(f.id)) continue;
            const Branch* br = c.find_branch(f.id);
            const hfsim::ProtectionGroup* group = relay_eval ? c.protection_for(f.id) : nullptr;
            if (!group) {
                open.insert(f.id);
                continue;
            }
            relay::TripDecision dec =
                oracle_decide(group->scheme, health_of(*group, latents),
                              {relay::FaultLocation::IN_ZONE, relay::FaultCondition::FAULT});
            if (dec.classification == relay::Classification::FAILURE_TO_TRIP) {
                isolate_bus(br->from_bus);
                isolate_bus(br->to_bus);
                continue;
            }
            open.insert(f.id);
            if (dec.transfer_trip_end)
                isolate_bus(*dec.transfer_trip_end == relay::LineEnd::A ? br->from_bus
                                                                        : br->to_bus);
        }
    }

    void provoke_latents(const std::vector<ElementRef>& faults,
                         const std::vector<LatentFailure>& latents, int rov_depth) {
        for (const auto& group : c.protection) {
            if (!live(group.branch) || faulted.count(group.branch)) continue;
            relay::ComponentHealth h = health_of(group, latents);
            if (h.all_ok()) continue;
            for (const auto& f : faults) {
                relay::FaultStimulus stim = oracle_stimulus(c, f, group.branch, rov_depth);
                if (stim.location == relay::FaultLocation::NONE) continue;
                relay::TripDecision dec = oracle_decide(group.scheme, h, stim);
                if (!dec.trip_a && !dec.trip_b && !dec.transfer_trip_end) continue;
                const Branch* br = c.find_branch(group.branch);
                open.insert(group.branch);
                if (dec.transfer_trip_end)
                    isolate_bus(*dec.transfer_trip_end == relay::LineEnd::A ? br->from_bus
                                                                            : br->to_bus);
                break;
            }
        }
    }

    CascadeOutcome settle(double factor, int max_steps) {
        CascadeOutcome out;
        for (int iteration = 1;; ++iteration) {
            balance(c, open, served, dispatch);
            std::vector<int> over;
            for (const auto& [id, mw] : all_flows(c, open, served, dispatch)) {
                const Branch* br = c.find_branch(id);
                if (std::fabs(mw) > br->rating_mw * factor) over.push_back(id);
            }
            if (over.empty()) break;
            if (iteration >= max_steps) {
                out.truncated = true;
                break;
            }
            for (int id : over) open.insert(id);
        }
        out.tripped = open;
        for (std::size_t i = 0; i < c.loads.size(); ++i)
            out.load_lost_mw += c.loads[i].p_mw - served[i];
        return out;
    }
};

}  // namespace

CascadeOutcome oracle_cascade(const GridCase& c, ElementRef fault,
                              const std::vector<LatentFailure>& latents, int rov_depth,
                              double overload_factor, int max_steps) {
    Run run(c);
    std::vector<ElementRef> faults{fault};
    if (fault.kind == ElementKind::BRANCH) run.faulted.insert(fault.id);
    run.clear_faults(faults, latents, true);
    run.provoke_latents(faults, latents, rov_depth);
    return run.settle(overload_factor, max_steps);
}

CascadeOutcome oracle_outage(const GridCase& c, const std::vector<int>& outages,
                             double overload_factor, int max_steps) {
    Run run(c);
    for (int id : outages)
        if (run.live(id)) run.open.insert(id);
    return run.settle(overload_factor, max_steps);
}

relay::FaultStimulus oracle_stimulus(const GridCase& c, ElementRef fault_element,
                                     int protected_branch, int rov_depth) {
    const ElementRef self{ElementKind::BRANCH, protected_branch};
    if (fault_element == self)
        return {relay::FaultLocation::IN_ZONE, relay::FaultCondition::FAULT};
    const int d = element_hops(c, fault_element, self);
    if (d < 0 || d > rov_depth)
        return {relay::FaultLocation::NONE, relay::FaultCondition::FAULT};
    const Branch* br = c.find_branch(protected_branch);
    const int dt = bus_hops(c, fault_element, br->to_bus);
    const int df = bus_hops(c, fault_element, br->from_bus);
    const bool to_side = dt >= 0 && (df < 0 || dt <= df);
    if (d == 1)
        return {to_side ? relay::FaultLocation::FORWARD_EXTERNAL_A
                        : relay::FaultLocation::FORWARD_EXTERNAL_B,
                relay::FaultCondition::FAULT};
    return {to_side ? relay::FaultLocation::REVERSE_B : relay::FaultLocation::REVERSE_A,
            relay::FaultCondition::FAULT};
}

}  // namespace oracle
