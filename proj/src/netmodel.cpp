#include "hfsim/netmodel.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace hfsim {

using ordered_json = nlohmann::ordered_json;

const Bus* GridCase::find_bus(int id) const {
    for (const auto& b : buses)
        if (b.id == id) return &b;
    return nullptr;
}

const Branch* GridCase::find_branch(int id) const {
    for (const auto& b : branches)
        if (b.id == id) return &b;
    return nullptr;
}

Branch* GridCase::find_branch(int id) {
    for (auto& b : branches)
        if (b.id == id) return &b;
    return nullptr;
}

const ProtectionGroup* GridCase::protection_for(int branch) const {
    for (const auto& p : protection)
        if (p.branch == branch) return &p;
    return nullptr;
}

double GridCase::total_load_mw() const {
    double sum = 0.0;
    for (const auto& l : loads) sum += l.p_mw;
    return sum;
}

std::string to_string(const ElementRef& e) {
    return std::string(e.kind == ElementKind::BUS ? "bus:" : "branch:") + std::to_string(e.id);
}

ElementRef parse_element(std::string_view text) {
    ElementKind kind;
    std::string_view rest;
    if (text.starts_with("bus:")) {
        kind = ElementKind::BUS;
        rest = text.substr(4);
    } else if (text.starts_with("branch:")) {
        kind = ElementKind::BRANCH;
        rest = text.substr(7);
    } else {
        throw std::invalid_argument("element must look like bus:<id> or branch:<id>, got: " +
                                    std::string(text));
    }
    int id = 0;
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), id);
    if (ec != std::errc() || ptr != rest.data() + rest.size())
        throw std::invalid_argument("bad element id: " + std::string(text));
    return {kind, id};
}

SemanticError::SemanticError(std::vector<Violation> v)
    : std::runtime_error([&v] {
          std::ostringstream ss;
          ss << "case has " << v.size() << " violation(s)";
          for (const auto& viol : v)
              ss << "; " << viol.rule << " at " << to_string(viol.element) << ": " << viol.detail;
          return ss.str();
      }()),
      violations(std::move(v)) {}

// ---------------------------------------------------------------------------
// Parsing.

namespace {

std::pair<int, int> locate(std::string_view text, size_t byte) {
    int line = 1, col = 1;
    for (size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

[[noreturn]] void schema_error(const std::string& msg) { throw ParseError(msg, 0, 0); }

void check_fields(const ordered_json& obj, std::initializer_list<std::string_view> allowed,
                  const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            schema_error("unknown field \"" + key + "\" in " + where);
    }
}

const ordered_json& require_key(const ordered_json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) schema_error(where + " is missing required field \"" + key + "\"");
    return *it;
}

int get_int(const ordered_json& obj, const char* key, const std::string& where) {
    const auto& v = require_key(obj, key, where);
    if (!v.is_number_integer()) schema_error("field \"" + std::string(key) + "\" of " + where + " must be an integer");
    return v.get<int>();
}

double get_number(const ordered_json& obj, const char* key, const std::string& where) {
    const auto& v = require_key(obj, key, where);
    if (!v.is_number()) schema_error("field \"" + std::string(key) + "\" of " + where + " must be a number");
    return v.get<double>();
}

bool get_bool_or(const ordered_json& obj, const char* key, bool fallback, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_boolean()) schema_error("field \"" + std::string(key) + "\" of " + where + " must be a boolean");
    return it->get<bool>();
}

std::string get_string(const ordered_json& obj, const char* key, const std::string& where) {
    const auto& v = require_key(obj, key, where);
    if (!v.is_string()) schema_error("field \"" + std::string(key) + "\" of " + where + " must be a string");
    return v.get<std::string>();
}

const ordered_json& require_array(const ordered_json& doc, const char* key) {
    const auto& v = require_key(doc, key, "top level");
    if (!v.is_array()) schema_error(std::string("\"") + key + "\" must be an array");
    return v;
}

} // namespace

GridCase parse_case(std::string_view text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        auto [line, col] = locate(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError(e.what(), line, col);
    }
    if (!doc.is_object()) schema_error("top level must be an object");
    check_fields(doc,
                 {"format", "base_mw", "profile", "buses", "branches", "generators", "loads",
                  "protection"},
                 "top level");

    const auto fmt = get_string(doc, "format", "top level");
    if (fmt != "relaycase-1") schema_error("unsupported format \"" + fmt + "\" (expected \"relaycase-1\")");

    GridCase c;
    c.base_mw = get_number(doc, "base_mw", "top level");
    if (!(c.base_mw > 0)) schema_error("base_mw must be positive");

    if (auto it = doc.find("profile"); it != doc.end()) {
        if (!it->is_string()) schema_error("\"profile\" must be a string");
        try {
            c.profile = relay::parse_profile(it->get<std::string>());
        } catch (const std::invalid_argument& e) {
            schema_error(e.what());
        }
    }

    for (const auto& j : require_array(doc, "buses")) {
        if (!j.is_object()) schema_error("bus entries must be objects");
        check_fields(j, {"id", "slack"}, "bus");
        Bus b;
        b.id = get_int(j, "id", "bus");
        b.slack = get_bool_or(j, "slack", false, "bus");
        c.buses.push_back(b);
    }

    for (const auto& j : require_array(doc, "branches")) {
        if (!j.is_object()) schema_error("branch entries must be objects");
        check_fields(j, {"id", "from", "to", "x", "rating_mw", "status"}, "branch");
        Branch b;
        b.id = get_int(j, "id", "branch");
        const std::string where = "branch " + std::to_string(b.id);
        b.from_bus = get_int(j, "from", where);
        b.to_bus = get_int(j, "to", where);
        b.reactance = get_number(j, "x", where);
        b.rating_mw = get_number(j, "rating_mw", where);
        b.in_service = get_bool_or(j, "status", true, where);
        c.branches.push_back(b);
    }

    for (const auto& j : require_array(doc, "generators")) {
        if (!j.is_object()) schema_error("generator entries must be objects");
        check_fields(j, {"bus", "p_mw", "p_max_mw"}, "generator");
        Generator g;
        g.bus = get_int(j, "bus", "generator");
        g.p_mw = get_number(j, "p_mw", "generator");
        g.p_max_mw = get_number(j, "p_max_mw", "generator");
        c.generators.push_back(g);
    }

    for (const auto& j : require_array(doc, "loads")) {
        if (!j.is_object()) schema_error("load entries must be objects");
        check_fields(j, {"bus", "p_mw"}, "load");
        Load l;
        l.bus = get_int(j, "bus", "load");
        l.p_mw = get_number(j, "p_mw", "load");
        c.loads.push_back(l);
    }

    for (const auto& j : require_array(doc, "protection")) {
        if (!j.is_object()) schema_error("protection entries must be objects");
        check_fields(j, {"branch", "scheme", "health"}, "protection");
        ProtectionGroup p;
        p.branch = get_int(j, "branch", "protection");
        const std::string where = "protection of branch " + std::to_string(p.branch);
        try {
            p.scheme = relay::parse_scheme(get_string(j, "scheme", where));
        } catch (const std::invalid_argument& e) {
            schema_error(e.what());
        }
        p.health = relay::ComponentHealth(p.scheme);
        if (auto it = j.find("health"); it != j.end()) {
            if (!it->is_object()) schema_error("\"health\" of " + where + " must be an object");
            for (const auto& [comp_name, state_name] : it->items()) {
                if (!state_name.is_string())
                    schema_error("health entries of " + where + " must be strings");
                try {
                    p.health.set(relay::parse_component(comp_name),
                                 relay::parse_state(state_name.get<std::string>()));
                } catch (const std::invalid_argument& e) {
                    schema_error(std::string(e.what()) + " (" + where + ")");
                }
            }
        }
        c.protection.push_back(p);
    }

    if (auto v = validate(c); !v.empty()) throw SemanticError(std::move(v));
    return c;
}

std::string serialize_case(const GridCase& c) {
    ordered_json doc;
    doc["format"] = "relaycase-1";
    doc["base_mw"] = c.base_mw;
    doc["profile"] = std::string(relay::to_string(c.profile));
    auto& buses = doc["buses"] = ordered_json::array();
    for (const auto& b : c.buses) {
        ordered_json j;
        j["id"] = b.id;
        j["slack"] = b.slack;
        buses.push_back(std::move(j));
    }
    auto& branches = doc["branches"] = ordered_json::array();
    for (const auto& b : c.branches) {
        ordered_json j;
        j["id"] = b.id;
        j["from"] = b.from_bus;
        j["to"] = b.to_bus;
        j["x"] = b.reactance;
        j["rating_mw"] = b.rating_mw;
        j["status"] = b.in_service;
        branches.push_back(std::move(j));
    }
    auto& gens = doc["generators"] = ordered_json::array();
    for (const auto& g : c.generators) {
        ordered_json j;
        j["bus"] = g.bus;
        j["p_mw"] = g.p_mw;
        j["p_max_mw"] = g.p_max_mw;
        gens.push_back(std::move(j));
    }
    auto& loads = doc["loads"] = ordered_json::array();
    for (const auto& l : c.loads) {
        ordered_json j;
        j["bus"] = l.bus;
        j["p_mw"] = l.p_mw;
        loads.push_back(std::move(j));
    }
    auto& prot = doc["protection"] = ordered_json::array();
    for (const auto& p : c.protection) {
        ordered_json j;
        j["branch"] = p.branch;
        j["scheme"] = std::string(relay::to_string(p.scheme));
        ordered_json h = ordered_json::object();
        for (const auto& [comp, state] : p.health.overrides())
            h[std::string(relay::to_string(comp))] = std::string(relay::to_string(state));
        j["health"] = std::move(h);
        prot.push_back(std::move(j));
    }
    return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Validation.

std::vector<Violation> validate(const GridCase& c) {
    std::vector<Violation> out;
    const auto bus_ref = [](int id) { return ElementRef{ElementKind::BUS, id}; };
    const auto br_ref = [](int id) { return ElementRef{ElementKind::BRANCH, id}; };

    std::set<int> bus_ids;
    for (const auto& b : c.buses)
        if (!bus_ids.insert(b.id).second)
            out.push_back({"duplicate_bus_id", bus_ref(b.id), "bus id appears more than once"});

    std::set<int> branch_ids;
    for (const auto& b : c.branches) {
        if (!branch_ids.insert(b.id).second)
            out.push_back({"duplicate_branch_id", br_ref(b.id), "branch id appears more than once"});
        for (int end : {b.from_bus, b.to_bus})
            if (!bus_ids.count(end))
                out.push_back({"unknown_bus", br_ref(b.id),
                               "references unknown bus " + std::to_string(end)});
        if (b.from_bus == b.to_bus)
            out.push_back({"self_loop", br_ref(b.id), "from and to are the same bus"});
        if (!(b.reactance > 0))
            out.push_back({"nonpositive_reactance", br_ref(b.id), "reactance must be > 0"});
        if (!(b.rating_mw > 0))
            out.push_back({"nonpositive_rating", br_ref(b.id), "rating_mw must be > 0"});
    }

    for (const auto& g : c.generators) {
        if (!bus_ids.count(g.bus))
            out.push_back({"unknown_bus", bus_ref(g.bus), "generator at unknown bus"});
        if (g.p_mw < 0)
            out.push_back({"negative_power", bus_ref(g.bus), "generator p_mw must be >= 0"});
        if (g.p_max_mw < 0)
            out.push_back({"negative_power", bus_ref(g.bus), "generator p_max_mw must be >= 0"});
        if (g.p_mw > g.p_max_mw)
            out.push_back({"dispatch_above_max", bus_ref(g.bus), "generator p_mw exceeds p_max_mw"});
    }

    for (const auto& l : c.loads) {
        if (!bus_ids.count(l.bus))
            out.push_back({"unknown_bus", bus_ref(l.bus), "load at unknown bus"});
        if (l.p_mw < 0)
            out.push_back({"negative_power", bus_ref(l.bus), "load p_mw must be >= 0"});
    }

    std::set<int> protected_branches;
    for (const auto& p : c.protection) {
        if (!branch_ids.count(p.branch))
            out.push_back({"unknown_branch", br_ref(p.branch), "protection on unknown branch"});
        if (!protected_branches.insert(p.branch).second)
            out.push_back({"duplicate_protection", br_ref(p.branch),
                           "branch has more than one protection group"});
    }

    // One slack per island, for islands that actually carry equipment.
    // Only run when the references above were sound.
    const bool refs_ok = std::all_of(out.begin(), out.end(), [](const Violation& v) {
        return v.rule != "unknown_bus" && v.rule != "duplicate_bus_id" &&
               v.rule != "duplicate_branch_id";
    });
    if (refs_ok) {
        for (const auto& island : islands(c)) {
            const bool has_equipment =
                std::any_of(c.generators.begin(), c.generators.end(),
                            [&](const Generator& g) {
                                return std::binary_search(island.begin(), island.end(), g.bus);
                            }) ||
                std::any_of(c.loads.begin(), c.loads.end(), [&](const Load& l) {
                    return std::binary_search(island.begin(), island.end(), l.bus);
                });
            if (!has_equipment) continue;
            int slacks = 0;
            for (int bus : island)
                if (c.find_bus(bus)->slack) ++slacks;
            if (slacks != 1)
                out.push_back({"slack_count", bus_ref(island.front()),
                               "island has " + std::to_string(slacks) +
                                   " slack buses, expected exactly 1"});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Topology.

std::vector<std::vector<int>> islands(const GridCase& c) {
    std::map<int, std::vector<int>> adj;
    for (const auto& b : c.buses) adj[b.id];
    for (const auto& br : c.branches) {
        if (!br.in_service) continue;
        adj[br.from_bus].push_back(br.to_bus);
        adj[br.to_bus].push_back(br.from_bus);
    }
    std::set<int> seen;
    std::vector<std::vector<int>> out;
    for (const auto& b : c.buses) {
        if (seen.count(b.id)) continue;
        std::vector<int> island;
        std::deque<int> queue{b.id};
        seen.insert(b.id);
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            island.push_back(u);
            for (int v : adj[u])
                if (seen.insert(v).second) queue.push_back(v);
        }
        std::sort(island.begin(), island.end());
        out.push_back(std::move(island));
    }
    return out;
}

namespace {

std::vector<ElementRef> element_neighbors(const GridCase& c, const ElementRef& e) {
    std::vector<ElementRef> out;
    if (e.kind == ElementKind::BRANCH) {
        const Branch* br = c.find_branch(e.id);
        out.push_back({ElementKind::BUS, br->from_bus});
        out.push_back({ElementKind::BUS, br->to_bus});
        for (const auto& other : c.branches) {
            if (!other.in_service || other.id == br->id) continue;
            if (other.from_bus == br->from_bus || other.from_bus == br->to_bus ||
                other.to_bus == br->from_bus || other.to_bus == br->to_bus)
                out.push_back({ElementKind::BRANCH, other.id});
        }
    } else {
        std::set<int> adjacent_buses;
        for (const auto& br : c.branches) {
            if (!br.in_service) continue;
            if (br.from_bus == e.id || br.to_bus == e.id) {
                out.push_back({ElementKind::BRANCH, br.id});
                adjacent_buses.insert(br.from_bus == e.id ? br.to_bus : br.from_bus);
            }
        }
        for (int bus : adjacent_buses) out.push_back({ElementKind::BUS, bus});
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void check_element(const GridCase& c, const ElementRef& e, const char* what) {
    if (e.kind == ElementKind::BUS) {
        if (!c.find_bus(e.id))
            throw std::invalid_argument(std::string(what) + " references unknown " + to_string(e));
    } else {
        const Branch* br = c.find_branch(e.id);
        if (!br) throw std::invalid_argument(std::string(what) + " references unknown " + to_string(e));
        if (!br->in_service)
            throw std::invalid_argument(std::string(what) + " references out-of-service " + to_string(e));
    }
}

} // namespace

RegionOfVulnerability region_of_vulnerability(const GridCase& c, ElementRef center, int depth) {
    check_element(c, center, "region center");
    if (depth < 0) throw std::invalid_argument("region depth must be >= 0");
    std::map<ElementRef, int> dist{{center, 0}};
    std::deque<ElementRef> queue{center};
    while (!queue.empty()) {
        ElementRef u = queue.front();
        queue.pop_front();
        if (dist[u] == depth) continue;
        for (const auto& v : element_neighbors(c, u)) {
            if (dist.count(v)) continue;
            dist[v] = dist[u] + 1;
            queue.push_back(v);
        }
    }
    RegionOfVulnerability r;
    r.center = center;
    r.depth = depth;
    for (const auto& [e, d] : dist) {
        (void)d;
        r.members.push_back(e);
    }
    std::sort(r.members.begin(), r.members.end());
    return r;
}

int element_distance(const GridCase& c, ElementRef a, ElementRef b) {
    check_element(c, a, "element");
    check_element(c, b, "element");
    if (a == b) return 0;
    std::map<ElementRef, int> dist{{a, 0}};
    std::deque<ElementRef> queue{a};
    while (!queue.empty()) {
        ElementRef u = queue.front();
        queue.pop_front();
        for (const auto& v : element_neighbors(c, u)) {
            if (dist.count(v)) continue;
            dist[v] = dist[u] + 1;
            if (v == b) return dist[v];
            queue.push_back(v);
        }
    }
    return -1;
}

} // namespace hfsim
