#include "blend/report.hpp"

#include <cmath>
#include <cstdio>

namespace blend {

void Report::add_upper(const std::string& name, double measured, double limit, const std::string& note) {
    add(Clause{name, measured < limit, measured, limit, limit - measured, note});
}

void Report::add_lower(const std::string& name, double measured, double limit, const std::string& note) {
    add(Clause{name, measured > limit, measured, limit, measured - limit, note});
}

bool Report::all_pass() const {
    for (const auto& c : clauses)
        if (!c.pass) return false;
    return true;
}

const Clause* Report::find(const std::string& name) const {
    for (const auto& c : clauses)
        if (c.name == name) return &c;
    return nullptr;
}

json Report::to_json() const {
    json arr = json::array();
    for (const auto& c : clauses) {
        json o;
        o["name"] = c.name;
        o["pass"] = c.pass;
        o["measured"] = c.measured;
        o["limit"] = c.limit;
        o["margin"] = c.margin;
        if (!c.note.empty()) o["note"] = c.note;
        arr.push_back(o);
    }
    return arr;
}

std::string format_double(double x) {
    if (std::isnan(x)) return "NaN";
    if (std::isinf(x)) return x > 0 ? "Infinity" : "-Infinity";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

void emit(const json& j, int indent, int depth, std::string& out) {
    auto newline = [&](int d) {
        if (indent < 0) return;
        out += '\n';
        out.append(static_cast<std::size_t>(indent * d), ' ');
    };
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) { out += "{}"; return; }
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ',';
                first = false;
                newline(depth + 1);
                out += json(it.key()).dump();
                out += indent < 0 ? ":" : ": ";
                emit(it.value(), indent, depth + 1, out);
            }
            newline(depth);
            out += '}';
            return;
        }
        case json::value_t::array: {
            if (j.empty()) { out += "[]"; return; }
            out += '[';
            bool first = true;
            for (const auto& v : j) {
                if (!first) out += ',';
                first = false;
                newline(depth + 1);
                emit(v, indent, depth + 1, out);
            }
            newline(depth);
            out += ']';
            return;
        }
        case json::value_t::number_float: {
            double x = j.get<double>();
            // JSON has no NaN/Inf; write them as strings.
            if (!std::isfinite(x)) out += '"' + format_double(x) + '"';
            else out += format_double(x);
            return;
        }
        default:
            out += j.dump();
    }
}

}  // namespace

std::string dump_json(const json& j, int indent) {
    std::string out;
    emit(j, indent, 0, out);
    return out;
}

}  // namespace blend
