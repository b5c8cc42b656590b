#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace blend {

using json = nlohmann::ordered_json;

// One checked hypothesis or bound. margin > 0 means the clause passed with room.
struct Clause {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double limit = 0.0;
    double margin = 0.0;
    std::string note;
};

struct Report {
    std::vector<Clause> clauses;

    void add(Clause c) { clauses.push_back(std::move(c)); }
    // measured < limit passes, margin = limit - measured.
    void add_upper(const std::string& name, double measured, double limit, const std::string& note = "");
    // measured > limit passes, margin = measured - limit.
    void add_lower(const std::string& name, double measured, double limit, const std::string& note = "");
    bool all_pass() const;
    const Clause* find(const std::string& name) const;
    json to_json() const;
};

std::string format_double(double x);
// Serializes with every floating-point number written to 17 significant digits.
std::string dump_json(const json& j, int indent = 2);

}  // namespace blend
