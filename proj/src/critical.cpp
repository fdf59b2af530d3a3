#include "hfsim/critical.hpp"

#include <algorithm>
#include <atomic>
#include <set>
#include <stdexcept>
#include <thread>

namespace hfsim::critical {

namespace {

// Deterministic generator used for sampling so results do not depend on
// any library's distribution implementation.
std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::vector<int> in_service_branches(const GridCase& c) {
    std::vector<int> ids;
    for (const auto& br : c.branches)
        if (br.in_service) ids.push_back(br.id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

// Branches opened by protection in the fault and latent-exposure steps;
// these are what the screening criteria get to look at.
std::vector<int> initial_trip_set(const cascade::CascadeTrace& trace) {
    std::set<int> ids;
    for (const auto& ev : trace.events) {
        if (ev.step > 1) continue;
        if (ev.element.kind != ElementKind::BRANCH) continue;
        switch (ev.cause) {
            case cascade::EventCause::CORRECT_CLEARING:
            case cascade::EventCause::REMOTE_BACKUP:
            case cascade::EventCause::MISOPERATION:
            case cascade::EventCause::BREAKER_FAILURE_SPREAD:
                ids.insert(ev.element.id);
                break;
            default:
                break;
        }
    }
    return {ids.begin(), ids.end()};
}

} // namespace

std::vector<RelayImpact> rank_relays(const GridCase& c, const RankOptions& options) {
    if (options.prior_misop < 0.0 || options.prior_misop > 1.0)
        throw std::invalid_argument("prior_misop must lie in [0, 1]");
    if (options.threads < 1) throw std::invalid_argument("threads must be at least 1");

    std::vector<const ProtectionGroup*> groups;
    for (const auto& g : c.protection) groups.push_back(&g);
    std::sort(groups.begin(), groups.end(),
              [](const ProtectionGroup* a, const ProtectionGroup* b) {
                  return a->branch < b->branch;
              });

    const dc::FlowSolution base = dc::solve_case(c);

    auto evaluate_group = [&](const ProtectionGroup& g) {
        RelayImpact row;
        row.branch = g.branch;
        row.scheme = g.scheme;
        const auto modes = relay::modes_for_profile(g.scheme, c.profile);
        if (modes.empty()) return row;
        if (!c.find_branch(g.branch)->in_service) return row;

        std::vector<int> faults;
        for (int id : in_service_branches(c)) {
            relay::FaultStimulus stim = cascade::enumerate_stimulus(
                c, {ElementKind::BRANCH, id}, g.branch, options.rov_depth);
            if (stim.location != relay::FaultLocation::NONE) faults.push_back(id);
        }

        double total = 0.0;
        for (const auto& mode : modes) {
            for (int fault : faults) {
                cascade::ScenarioSpec spec;
                spec.initiating_fault = {ElementKind::BRANCH, fault};
                spec.hidden_failures = {{g.branch, mode.component, mode.state}};
                spec.rov_depth = options.rov_depth;
                spec.overload_trip_factor = options.overload_trip_factor;
                spec.max_steps = options.max_steps;
                cascade::CascadeTrace trace = cascade::run_cascade(c, spec);

                ++row.scenarios;
                total += trace.load_lost_mw;
                row.worst_load_lost_mw = std::max(row.worst_load_lost_mw, trace.load_lost_mw);
                dc::CriteriaReport rep = dc::screening_criteria(c, base, initial_trip_set(trace),
                                                                options.thresholds);
                if (rep.flag_c1 || rep.flag_c2 || rep.flag_c3 || rep.flag_c4)
                    ++row.flagged_by_criteria;
            }
        }
        if (row.scenarios > 0)
            row.expected_load_lost_mw = options.prior_misop * (total / row.scenarios);
        return row;
    };

    std::vector<RelayImpact> rows(groups.size());
    if (options.threads == 1 || groups.size() <= 1) {
        for (std::size_t i = 0; i < groups.size(); ++i) rows[i] = evaluate_group(*groups[i]);
    } else {
        // Work is claimed by index and written to the owning slot, so the
        // aggregate is identical for any thread count.
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next.fetch_add(1); i < groups.size(); i = next.fetch_add(1))
                rows[i] = evaluate_group(*groups[i]);
        };
        std::vector<std::thread> pool;
        int n = std::min<int>(options.threads, static_cast<int>(groups.size()));
        for (int t = 0; t < n; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::sort(rows.begin(), rows.end(), [](const RelayImpact& a, const RelayImpact& b) {
        if (a.expected_load_lost_mw != b.expected_load_lost_mw)
            return a.expected_load_lost_mw > b.expected_load_lost_mw;
        return a.branch < b.branch;
    });
    return rows;
}

std::vector<MinimalSet> minimal_cascading_sets(const GridCase& c,
                                               const ChemistryOptions& options) {
    if (options.k0 < 1) throw std::invalid_argument("k0 must be at least 1");
    if (options.trials < 1) throw std::invalid_argument("trials must be at least 1");

    const double threshold = options.blackout_threshold_mw >= 0.0
                                 ? options.blackout_threshold_mw
                                 : 0.10 * c.total_load_mw();
    const std::vector<int> pool = in_service_branches(c);
    if (pool.empty()) return {};
    const std::size_t k0 = std::min<std::size_t>(options.k0, pool.size());

    cascade::ScenarioSpec run_options;
    run_options.overload_trip_factor = options.overload_trip_factor;
    run_options.max_steps = options.max_steps;
    auto loss = [&](const std::vector<int>& outage) {
        return cascade::run_outage(c, outage, run_options).load_lost_mw;
    };

    std::uint64_t state = options.seed;
    std::set<std::vector<int>> seen;
    std::vector<MinimalSet> found;

    for (int trial = 0; trial < options.trials; ++trial) {
        std::vector<int> deck = pool;
        for (std::size_t i = 0; i < k0; ++i) {
            std::size_t j = i + static_cast<std::size_t>(splitmix64(state) % (deck.size() - i));
            std::swap(deck[i], deck[j]);
        }
        std::vector<int> sample(deck.begin(), deck.begin() + k0);
        std::sort(sample.begin(), sample.end());
        if (loss(sample) < threshold) continue;

        // Shrink: drop elements in random order while the blackout persists;
        // a full pass with no drop means no single removal preserves it.
        bool changed = true;
        while (changed && sample.size() > 1) {
            changed = false;
            std::vector<int> order = sample;
            for (std::size_t i = order.size(); i > 1; --i)
                std::swap(order[i - 1], order[splitmix64(state) % i]);
            for (int el : order) {
                if (sample.size() == 1) break;
                auto it = std::find(sample.begin(), sample.end(), el);
                if (it == sample.end()) continue;
                std::vector<int> candidate = sample;
                candidate.erase(candidate.begin() + (it - sample.begin()));
                if (loss(candidate) >= threshold) {
                    sample = std::move(candidate);
                    changed = true;
                }
            }
        }

        if (!seen.insert(sample).second) continue;
        MinimalSet ms;
        ms.elements = sample;
        ms.load_lost_mw = loss(sample);
        for (std::size_t i = 0; i < sample.size() && ms.minimal; ++i) {
            std::vector<int> candidate = sample;
            candidate.erase(candidate.begin() + i);
            if (loss(candidate) >= threshold) ms.minimal = false;
        }
        if (ms.minimal) found.push_back(std::move(ms));
    }

    std::sort(found.begin(), found.end(), [](const MinimalSet& a, const MinimalSet& b) {
        if (a.elements.size() != b.elements.size()) return a.elements.size() < b.elements.size();
        return a.elements < b.elements;
    });
    return found;
}

std::vector<NMinusKRow> n_minus_k_distinction_report(const GridCase& c, int k,
                                                     const NMinusKOptions& options) {
    if (k < 1 || k > 3) throw std::invalid_argument("k must be 1, 2 or 3");
    const std::vector<int> pool = in_service_branches(c);
    const std::size_t n = pool.size();
    if (n < static_cast<std::size_t>(k)) return {};

    unsigned long long combos = 1;
    for (int i = 0; i < k; ++i) combos = combos * (n - i) / (i + 1);
    if (combos > static_cast<unsigned long long>(options.enumeration_cap))
        throw std::invalid_argument("k-subset enumeration exceeds the configured cap");

    // Redispatch headroom is judged against what lines may actually carry
    // short-term, i.e. the emergency rating the cascade engine trips at.
    GridCase emergency = c;
    for (auto& br : emergency.branches) br.rating_mw *= options.overload_trip_factor;

    cascade::ScenarioSpec run_options;
    run_options.overload_trip_factor = options.overload_trip_factor;
    run_options.max_steps = options.max_steps;
    run_options.rov_depth = options.rov_depth;

    std::vector<NMinusKRow> rows;
    std::vector<std::size_t> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    for (;;) {
        NMinusKRow row;
        for (int i = 0; i < k; ++i) row.branches.push_back(pool[idx[i]]);
        row.direct_shed_mw = dc::min_load_shed(emergency, row.branches).total_shed_mw;
        std::vector<ElementRef> faults;
        for (int id : row.branches) faults.push_back({ElementKind::BRANCH, id});
        row.cascade_loss_mw = cascade::run_fault_set(c, faults, run_options).load_lost_mw;
        rows.push_back(std::move(row));

        int pos = k - 1;
        while (pos >= 0 && idx[pos] == n - static_cast<std::size_t>(k - pos)) --pos;
        if (pos < 0) break;
        ++idx[pos];
        for (int i = pos + 1; i < k; ++i) idx[i] = idx[i - 1] + 1;
    }

    std::sort(rows.begin(), rows.end(), [](const NMinusKRow& a, const NMinusKRow& b) {
        double da = a.cascade_loss_mw - a.direct_shed_mw;
        double db = b.cascade_loss_mw - b.direct_shed_mw;
        if (da != db) return da > db;
        return a.branches < b.branches;
    });
    return rows;
}

} // namespace hfsim::critical
