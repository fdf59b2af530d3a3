#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hfsim/relays.hpp"

namespace hfsim {

struct Bus {
    int id = 0;
    bool slack = false;
    bool operator==(const Bus&) const = default;
};

struct Branch {
    int id = 0;
    int from_bus = 0;
    int to_bus = 0;
    double reactance = 0.0;  // per-unit on the case base
    double rating_mw = 0.0;
    bool in_service = true;
    bool operator==(const Branch&) const = default;
};

struct Generator {
    int bus = 0;
    double p_mw = 0.0;
    double p_max_mw = 0.0;
    bool operator==(const Generator&) const = default;
};

struct Load {
    int bus = 0;
    double p_mw = 0.0;
    bool operator==(const Load&) const = default;
};

struct ProtectionGroup {
    int branch = 0;
    relay::SchemeKind scheme = relay::SchemeKind::ZONE123;
    relay::ComponentHealth health;
    bool operator==(const ProtectionGroup&) const = default;
};

struct GridCase {
    double base_mw = 100.0;
    relay::Profile profile = relay::Profile::ELECTROMECHANICAL;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<Generator> generators;
    std::vector<Load> loads;
    std::vector<ProtectionGroup> protection;

    const Bus* find_bus(int id) const;
    const Branch* find_branch(int id) const;
    Branch* find_branch(int id);
    const ProtectionGroup* protection_for(int branch) const;
    double total_load_mw() const;

    bool operator==(const GridCase&) const = default;
};

// Either end of the element universe faults and regions range over.
enum class ElementKind { BUS, BRANCH };

struct ElementRef {
    ElementKind kind = ElementKind::BRANCH;
    int id = 0;
    auto operator<=>(const ElementRef&) const = default;
};

std::string to_string(const ElementRef& e);       // "bus:4" / "branch:12"
ElementRef parse_element(std::string_view text);

// Syntax-level failure: malformed JSON, wrong types, unknown fields,
// missing schema marker.  line/column point at the offending byte when
// the JSON itself failed to parse (0/0 for structural schema errors).
struct ParseError : std::runtime_error {
    ParseError(std::string msg, int line_, int column_)
        : std::runtime_error(std::move(msg)), line(line_), column(column_) {}
    int line = 0;
    int column = 0;
};

struct Violation {
    std::string rule;       // short machine-readable rule name
    ElementRef element;
    std::string detail;
    bool operator==(const Violation&) const = default;
};

// Semantic-level failure, carries everything validate() found.
struct SemanticError : std::runtime_error {
    explicit SemanticError(std::vector<Violation> v);
    std::vector<Violation> violations;
};

// Parses and cross-checks a relaycase-1 document.  Throws ParseError on
// syntax problems and SemanticError when validate() reports violations.
GridCase parse_case(std::string_view text);

// Canonical serialization; parse_case(serialize_case(c)) == c.
std::string serialize_case(const GridCase& c);

// All semantic rules: duplicate ids, dangling bus references, non-positive
// reactance or rating, slack count per island, protection referencing
// unknown branches or duplicated per branch, negative powers, p > p_max.
std::vector<Violation> validate(const GridCase& c);

// Connected components over in-service branches; each island is a sorted
// bus id list, islands ordered by their lowest bus id.
std::vector<std::vector<int>> islands(const GridCase& c);

struct RegionOfVulnerability {
    ElementRef center;
    int depth = 0;
    std::vector<ElementRef> members;   // sorted, includes the center
};

// Breadth-first ball around `center` in the element adjacency graph
// (branch-bus incidence, branches sharing a bus, buses sharing a branch),
// restricted to in-service branches.
RegionOfVulnerability region_of_vulnerability(const GridCase& c, ElementRef center, int depth);

// Hop count between two elements in the same graph; -1 when unreachable.
int element_distance(const GridCase& c, ElementRef a, ElementRef b);

} // namespace hfsim
