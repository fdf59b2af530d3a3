#include "hfsim/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "hfsim/textio.hpp"

namespace hfsim::cascade {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(EventCause c) {
    switch (c) {
        case EventCause::INITIATING_FAULT: return "INITIATING_FAULT";
        case EventCause::CORRECT_CLEARING: return "CORRECT_CLEARING";
        case EventCause::REMOTE_BACKUP: return "REMOTE_BACKUP";
        case EventCause::MISOPERATION: return "MISOPERATION";
        case EventCause::BREAKER_FAILURE_SPREAD: return "BREAKER_FAILURE_SPREAD";
        case EventCause::OVERLOAD_TRIP: return "OVERLOAD_TRIP";
        case EventCause::ISLAND_SHED: return "ISLAND_SHED";
        case EventCause::ISLAND_BLACKOUT: return "ISLAND_BLACKOUT";
    }
    return "?";
}

namespace {

// Bus-graph hop count from any endpoint of `from` to bus `target`,
// in-service branches only.  -1 when unreachable.
int bus_distance(const GridCase& c, ElementRef from, int target) {
    std::vector<int> seeds;
    if (from.kind == ElementKind::BUS) {
        seeds.push_back(from.id);
    } else {
        const Branch* br = c.find_branch(from.id);
        seeds.push_back(br->from_bus);
        seeds.push_back(br->to_bus);
    }
    std::map<int, int> dist;
    std::deque<int> queue;
    for (int s : seeds) {
        dist[s] = 0;
        queue.push_back(s);
    }
    while (!queue.empty()) {
        int bus = queue.front();
        queue.pop_front();
        if (bus == target) return dist[bus];
        for (const auto& br : c.branches) {
            if (!br.in_service) continue;
            if (br.from_bus != bus && br.to_bus != bus) continue;
            int other = br.from_bus == bus ? br.to_bus : br.from_bus;
            if (dist.count(other)) continue;
            dist[other] = dist[bus] + 1;
            queue.push_back(other);
        }
    }
    return dist.count(target) ? dist[target] : -1;
}

struct Engine {
    const GridCase& base;
    GridCase work;
    std::vector<double> served;    // parallel to base.loads
    std::vector<double> dispatch;  // parallel to base.generators
    std::set<int> faulted_branches;
    CascadeTrace out;

    explicit Engine(const GridCase& c) : base(c), work(c) {
        served.reserve(c.loads.size());
        for (const auto& l : c.loads) served.push_back(l.p_mw);
        dispatch.reserve(c.generators.size());
        for (const auto& g : c.generators) dispatch.push_back(g.p_mw);
    }

    bool in_service(int branch) const {
        const Branch* br = work.find_branch(branch);
        return br && br->in_service;
    }

    void event(int step, EventCause cause, ElementRef el, double mw, std::string detail) {
        out.events.push_back({step, cause, el, mw, std::move(detail)});
    }

    // Opens the branch and records why.  Idempotent: a branch trips once.
    bool trip(int id, int step, EventCause cause, double mw, std::string detail) {
        Branch* br = work.find_branch(id);
        if (!br || !br->in_service) return false;
        br->in_service = false;
        out.tripped_branches.insert(id);
        event(step, cause, {ElementKind::BRANCH, id}, mw, std::move(detail));
        return true;
    }

    // In-service branches touching `bus`, ascending id.
    std::vector<int> branches_at(int bus) const {
        std::vector<int> ids;
        for (const auto& br : work.branches)
            if (br.in_service && (br.from_bus == bus || br.to_bus == bus)) ids.push_back(br.id);
        std::sort(ids.begin(), ids.end());
        return ids;
    }

    relay::ComponentHealth effective_health(const ProtectionGroup& group,
                                            const std::vector<LatentFailure>& latents) const {
        relay::ComponentHealth h = group.health;
        for (const auto& lf : latents)
            if (lf.branch == group.branch) h.set(lf.component, lf.state);
        return h;
    }

    void spread_at_bus(int bus, int step) {
        for (int id : branches_at(bus))
            trip(id, step, EventCause::BREAKER_FAILURE_SPREAD, 0.0,
                 "stuck breaker isolated at bus " + std::to_string(bus));
    }

    // The faulted element's own protection response: correct clearing,
    // remote backup on a failure to trip, breaker-failure transfer trips.
    void clear_fault(const ElementRef& fault, const std::vector<LatentFailure>& latents,
                     bool relay_eval) {
        event(0, EventCause::INITIATING_FAULT, fault, 0.0, "");
        if (fault.kind == ElementKind::BUS) {
            for (int id : branches_at(fault.id))
                trip(id, 0, EventCause::CORRECT_CLEARING, 0.0,
                     "bus fault isolated at bus " + std::to_string(fault.id));
            return;
        }
        if (!in_service(fault.id)) return;  // already de-energized by an earlier fault
        const ProtectionGroup* group = relay_eval ? work.protection_for(fault.id) : nullptr;
        if (!group) {
            trip(fault.id, 0, EventCause::CORRECT_CLEARING, 0.0, "line opened");
            return;
        }
        const Branch* br = work.find_branch(fault.id);
        relay::TripDecision dec =
            relay::evaluate_scheme(group->scheme, effective_health(*group, latents),
                                   {relay::FaultLocation::IN_ZONE, relay::FaultCondition::FAULT});
        if (dec.classification == relay::Classification::FAILURE_TO_TRIP) {
            // Breakers stay closed; the neighbours' backup zones de-energize
            // everything around both end buses, the faulted line included.
            int lo = std::min(br->from_bus, br->to_bus);
            int hi = std::max(br->from_bus, br->to_bus);
            for (int bus : {lo, hi})
                for (int id : branches_at(bus))
                    trip(id, 0, EventCause::REMOTE_BACKUP, 0.0,
                         "backup clearing around bus " + std::to_string(bus));
            return;
        }
        int from_bus = br->from_bus, to_bus = br->to_bus;
        trip(fault.id, 0, EventCause::CORRECT_CLEARING, 0.0,
             std::string(relay::to_string(group->scheme)) + " in-zone trip");
        if (dec.transfer_trip_end)
            spread_at_bus(*dec.transfer_trip_end == relay::LineEnd::A ? from_bus : to_bus, 0);
    }

    // Healthy relays stay quiet for out-of-zone faults; relays with latent
    // defects may not.  Every provoked trip lands in step 1.
    void expose_latents(const std::vector<ElementRef>& faults,
                        const std::vector<LatentFailure>& latents, int rov_depth) {
        for (const auto& group : work.protection) {
            if (!in_service(group.branch)) continue;
            if (faulted_branches.count(group.branch)) continue;
            relay::ComponentHealth health = effective_health(group, latents);
            if (health.all_ok()) continue;
            for (const auto& fault : faults) {
                relay::FaultStimulus stim =
                    enumerate_stimulus(base, fault, group.branch, rov_depth);
                if (stim.location == relay::FaultLocation::NONE) continue;
                relay::TripDecision dec = relay::evaluate_scheme(group.scheme, health, stim);
                if (!dec.trip_a && !dec.trip_b && !dec.transfer_trip_end) continue;
                const Branch* br = work.find_branch(group.branch);
                int from_bus = br->from_bus, to_bus = br->to_bus;
                trip(group.branch, 1, EventCause::MISOPERATION, 0.0,
                     std::string(relay::to_string(group.scheme)) + " tripped on " +
                         std::string(relay::to_string(stim.location)));
                if (dec.transfer_trip_end)
                    spread_at_bus(*dec.transfer_trip_end == relay::LineEnd::A ? from_bus : to_bus,
                                  1);
                break;  // first provoking fault settles this relay's response
            }
        }
    }

    // Proportional-to-capacity generation dispatch per island; shortfalls
    // shed load pro rata, islands without generation black out.
    void balance(int step) {
        for (const auto& island : islands(work)) {
            std::set<int> members(island.begin(), island.end());
            double load = 0.0, cap = 0.0;
            for (std::size_t i = 0; i < base.loads.size(); ++i)
                if (members.count(base.loads[i].bus)) load += served[i];
            for (std::size_t i = 0; i < base.generators.size(); ++i)
                if (members.count(base.generators[i].bus)) cap += base.generators[i].p_max_mw;

            if (cap <= 1e-9) {
                if (load > 1e-9) {
                    std::string detail = "no generation left for buses";
                    for (int b : island) detail += " " + std::to_string(b);
                    event(step, EventCause::ISLAND_BLACKOUT,
                          {ElementKind::BUS, island.front()}, load, detail);
                    for (std::size_t i = 0; i < base.loads.size(); ++i)
                        if (members.count(base.loads[i].bus)) served[i] = 0.0;
                }
                for (std::size_t i = 0; i < base.generators.size(); ++i)
                    if (members.count(base.generators[i].bus)) dispatch[i] = 0.0;
                continue;
            }
            if (load > cap + 1e-9) {
                double deficit = load - cap;
                std::string detail = "generation short by " + format_double(deficit) +
                                     " MW, shedding pro rata";
                event(step, EventCause::ISLAND_SHED, {ElementKind::BUS, island.front()},
                      deficit, detail);
                double scale = cap / load;
                for (std::size_t i = 0; i < base.loads.size(); ++i)
                    if (members.count(base.loads[i].bus)) served[i] *= scale;
                load = cap;
            }
            double ratio = load / cap;
            for (std::size_t i = 0; i < base.generators.size(); ++i)
                if (members.count(base.generators[i].bus))
                    dispatch[i] = base.generators[i].p_max_mw * ratio;
        }
    }

    // One DC solution per island from the current served/dispatched powers.
    std::vector<dc::FlowSolution> solve_islands() const {
        std::vector<dc::FlowSolution> solutions;
        for (const auto& island : islands(work)) {
            std::set<int> members(island.begin(), island.end());
            std::map<int, double> injections;
            for (int b : island) injections[b] = 0.0;
            for (std::size_t i = 0; i < base.generators.size(); ++i)
                if (members.count(base.generators[i].bus))
                    injections[base.generators[i].bus] += dispatch[i];
            for (std::size_t i = 0; i < base.loads.size(); ++i)
                if (members.count(base.loads[i].bus))
                    injections[base.loads[i].bus] -= served[i];

            int reference = -1;
            for (int b : island) {
                const Bus* bus = work.find_bus(b);
                if (bus && bus->slack) {
                    reference = b;
                    break;
                }
            }
            if (reference < 0) {
                for (std::size_t i = 0; i < base.generators.size(); ++i)
                    if (members.count(base.generators[i].bus) &&
                        base.generators[i].p_max_mw > 0.0) {
                        reference = reference < 0 ? base.generators[i].bus
                                                  : std::min(reference, base.generators[i].bus);
                    }
            }
            if (reference < 0) {
                // De-energized island: everything at rest.
                dc::FlowSolution rest;
                rest.converged = true;
                rest.detail = "de-energized island";
                for (int b : island) rest.theta[b] = 0.0;
                for (const auto& br : work.branches)
                    if (br.in_service && members.count(br.from_bus)) rest.flow_mw[br.id] = 0.0;
                solutions.push_back(std::move(rest));
                continue;
            }
            solutions.push_back(dc::solve_island_custom(work, island, reference, injections));
        }
        return solutions;
    }

    void run(std::vector<ElementRef> faults, const std::vector<LatentFailure>& latents,
             const ScenarioSpec& spec, bool relay_eval) {
        if (spec.max_steps < 1) throw std::invalid_argument("max_steps must be at least 1");
        if (spec.overload_trip_factor <= 0.0)
            throw std::invalid_argument("overload_trip_factor must be positive");
        if (spec.rov_depth < 0) throw std::invalid_argument("rov_depth must be non-negative");
        std::sort(faults.begin(), faults.end());
        faults.erase(std::unique(faults.begin(), faults.end()), faults.end());
        for (const auto& f : faults) {
            if (f.kind == ElementKind::BUS) {
                if (!base.find_bus(f.id))
                    throw std::invalid_argument("unknown fault bus " + std::to_string(f.id));
            } else {
                const Branch* br = base.find_branch(f.id);
                if (!br) throw std::invalid_argument("unknown fault branch " + std::to_string(f.id));
                if (!br->in_service)
                    throw std::invalid_argument("fault branch " + std::to_string(f.id) +
                                                " is out of service");
                faulted_branches.insert(f.id);
            }
        }
        for (const auto& lf : latents) {
            const ProtectionGroup* group = base.protection_for(lf.branch);
            if (!group)
                throw std::invalid_argument("no protection group on branch " +
                                            std::to_string(lf.branch));
            relay::ComponentHealth probe = group->health;
            probe.set(lf.component, lf.state);  // validates component/state for the scheme
        }

        for (const auto& f : faults) clear_fault(f, latents, relay_eval);
        if (relay_eval && !faults.empty()) expose_latents(faults, latents, spec.rov_depth);

        for (int iteration = 1;; ++iteration) {
            const int step = 1 + iteration;
            balance(step);
            out.island_flows = solve_islands();
            std::vector<std::pair<int, double>> over;
            for (const auto& sol : out.island_flows)
                for (const auto& [id, mw] : sol.flow_mw) {
                    const Branch* br = work.find_branch(id);
                    if (std::abs(mw) > br->rating_mw * spec.overload_trip_factor)
                        over.emplace_back(id, std::abs(mw));
                }
            std::sort(over.begin(), over.end());
            if (over.empty()) {
                out.depth = iteration;
                break;
            }
            if (iteration >= spec.max_steps) {
                out.depth = iteration;
                out.truncated = true;
                break;
            }
            for (const auto& [id, mw] : over) {
                const Branch* br = work.find_branch(id);
                trip(id, step, EventCause::OVERLOAD_TRIP, mw,
                     "loaded to " + format_double(mw) + " MW against " +
                         format_double(br->rating_mw * spec.overload_trip_factor) +
                         " MW emergency rating");
            }
        }

        double lost = 0.0;
        for (std::size_t i = 0; i < base.loads.size(); ++i) lost += base.loads[i].p_mw - served[i];
        out.load_lost_mw = lost;
        out.lines_tripped = static_cast<int>(out.tripped_branches.size());
        out.terminal = work;
        for (std::size_t i = 0; i < served.size(); ++i) out.terminal.loads[i].p_mw = served[i];
        for (std::size_t i = 0; i < dispatch.size(); ++i)
            out.terminal.generators[i].p_mw = dispatch[i];
    }
};

} // namespace

CascadeTrace run_cascade(const GridCase& c, const ScenarioSpec& spec) {
    Engine e(c);
    e.run({spec.initiating_fault}, spec.hidden_failures, spec, true);
    return std::move(e.out);
}

CascadeTrace run_fault_set(const GridCase& c, const std::vector<ElementRef>& faults,
                           const ScenarioSpec& options) {
    if (faults.empty()) throw std::invalid_argument("fault set is empty");
    Engine e(c);
    e.run(faults, options.hidden_failures, options, true);
    return std::move(e.out);
}

CascadeTrace run_outage(const GridCase& c, const std::vector<int>& outage_branches,
                        const ScenarioSpec& options) {
    Engine e(c);
    for (int id : outage_branches) {
        const Branch* br = c.find_branch(id);
        if (!br) throw std::invalid_argument("unknown branch " + std::to_string(id));
        if (!br->in_service) continue;
        e.trip(id, 0, EventCause::INITIATING_FAULT, 0.0, "forced outage");
    }
    e.run({}, {}, options, false);
    return std::move(e.out);
}

relay::FaultStimulus enumerate_stimulus(const GridCase& c, ElementRef fault_element,
                                        int protected_branch, int rov_depth) {
    const Branch* br = c.find_branch(protected_branch);
    if (!br) throw std::invalid_argument("unknown branch " + std::to_string(protected_branch));
    if (fault_element.kind == ElementKind::BUS) {
        if (!c.find_bus(fault_element.id))
            throw std::invalid_argument("unknown fault bus " + std::to_string(fault_element.id));
    } else if (!c.find_branch(fault_element.id)) {
        throw std::invalid_argument("unknown fault branch " + std::to_string(fault_element.id));
    }

    ElementRef self{ElementKind::BRANCH, protected_branch};
    if (fault_element == self) return {relay::FaultLocation::IN_ZONE, relay::FaultCondition::FAULT};
    int d = element_distance(c, fault_element, self);
    if (d < 0 || d > rov_depth) return {relay::FaultLocation::NONE, relay::FaultCondition::FAULT};

    // Which end faces the fault: nearer to to_bus means it sits on end A's
    // forward side, nearer to from_bus on end B's.  Ties resolve to the
    // to_bus side.
    int to_to = bus_distance(c, fault_element, br->to_bus);
    int to_from = bus_distance(c, fault_element, br->from_bus);
    bool to_side = to_to >= 0 && (to_from < 0 || to_to <= to_from);
    if (d == 1)
        return {to_side ? relay::FaultLocation::FORWARD_EXTERNAL_A
                        : relay::FaultLocation::FORWARD_EXTERNAL_B,
                relay::FaultCondition::FAULT};
    return {to_side ? relay::FaultLocation::REVERSE_B : relay::FaultLocation::REVERSE_A,
            relay::FaultCondition::FAULT};
}

std::string events_ndjson(const CascadeTrace& t) {
    std::string lines;
    for (const auto& ev : t.events) {
        ordered_json row;
        row["step"] = ev.step;
        row["cause"] = to_string(ev.cause);
        row["element"] = to_string(ev.element);
        row["mw"] = ev.mw;
        row["detail"] = ev.detail;
        lines += row.dump();
        lines += "\n";
    }
    return lines;
}

std::string summary_json(const CascadeTrace& t) {
    ordered_json doc;
    doc["load_lost_mw"] = t.load_lost_mw;
    doc["lines_tripped"] = t.lines_tripped;
    doc["depth"] = t.depth;
    doc["truncated"] = t.truncated;
    doc["tripped_branches"] = t.tripped_branches;
    doc["events"] = t.events.size();
    return doc.dump(2) + "\n";
}

} // namespace hfsim::cascade
