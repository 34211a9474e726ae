#include "truncscore/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace truncscore {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool is_na(const std::string& s) {
    if (s.empty()) return true;
    std::string u;
    for (char c : s) u.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    return u == "NA" || u == "NAN";
}

double parse_double(const std::string& s, std::size_t row, const std::string& col) {
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ParseError("row " + std::to_string(row) + ": cannot parse '" + s +
                         "' in column " + col);
    }
    if (pos != s.size() || !std::isfinite(v))
        throw ParseError("row " + std::to_string(row) + ": cannot parse '" + s +
                         "' in column " + col);
    return v;
}

int parse_binary(const std::string& s, std::size_t row, const std::string& col) {
    const double v = parse_double(s, row, col);
    if (v != 0.0 && v != 1.0)
        throw ValidationError("row " + std::to_string(row) + ": column " + col +
                              " must be 0 or 1, got " + s);
    return static_cast<int>(v);
}

} // namespace

Dataset read_csv(std::istream& in, const CsvSchema& schema) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("empty input: no header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_line(line);

    auto find_col = [&](const std::string& name) {
        for (std::size_t j = 0; j < header.size(); ++j)
            if (trim(header[j]) == name) return j;
        throw SchemaError("missing column '" + name + "' in header");
    };
    const std::size_t ja = find_col(schema.a), jx1 = find_col(schema.x1),
                      jx2 = find_col(schema.x2), jy = find_col(schema.y),
                      jtime = find_col(schema.time), jr = find_col(schema.r),
                      jstatus = find_col(schema.status);

    Dataset d;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        ++row;
        if (trim(line).empty()) continue;
        const std::vector<std::string> f = split_line(line);
        if (f.size() != header.size())
            throw ParseError("row " + std::to_string(row) + ": has " +
                             std::to_string(f.size()) + " fields, header has " +
                             std::to_string(header.size()));
        SubjectRecord rec;
        rec.a = parse_binary(trim(f[ja]), row, schema.a);
        rec.x1 = parse_double(trim(f[jx1]), row, schema.x1);
        rec.x2 = parse_double(trim(f[jx2]), row, schema.x2);
        rec.time = parse_double(trim(f[jtime]), row, schema.time);
        rec.r = parse_binary(trim(f[jr]), row, schema.r);
        const double st = parse_double(trim(f[jstatus]), row, schema.status);
        if (st != 0.0 && st != 1.0 && st != 2.0)
            throw ValidationError("row " + std::to_string(row) +
                                  ": status must be 0, 1 or 2, got " + trim(f[jstatus]));
        rec.status = static_cast<int>(st);
        if (!(rec.time > 0.0))
            throw ValidationError("row " + std::to_string(row) + ": time must be positive");
        const std::string ys = trim(f[jy]);
        if (is_na(ys)) {
            if (rec.r == 1)
                throw ValidationError("row " + std::to_string(row) + ": r = 1 but y is missing");
        } else {
            if (rec.r == 0)
                throw ValidationError("row " + std::to_string(row) + ": r = 0 but y is present");
            rec.y = parse_double(ys, row, schema.y);
        }
        d.records.push_back(rec);
    }
    return d;
}

Dataset read_csv_file(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    return read_csv(in, schema);
}

void write_csv(std::ostream& out, const Dataset& d) {
    out << "a,x1,x2,y,time,r,status\n";
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf;
    };
    for (const SubjectRecord& rec : d.records) {
        out << rec.a << ',';
        put(rec.x1);
        out << ',';
        put(rec.x2);
        out << ',';
        if (rec.y)
            put(*rec.y);
        else
            out << "NA";
        out << ',';
        put(rec.time);
        out << ',' << rec.r << ',' << rec.status << '\n';
    }
}

void write_csv_file(const std::string& path, const Dataset& d) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open file for writing: " + path);
    write_csv(out, d);
}

Diagnostics validate_for_estimation(const Dataset& d, const LandmarkSpec& landmark) {
    Diagnostics g;
    g.n = d.n();
    const double tau = landmark.tau;
    for (const SubjectRecord& rec : d.records) {
        const int a = rec.a;
        ++g.n_arm[a];
        if (rec.r == 1) {
            ++g.n_r_raw[a];
            if (rec.time > tau)
                ++g.n_r_effective[a];
            else
                ++g.n_score_before_tau;
        } else if (rec.time > tau) {
            ++g.n_missing_survivor;
        }
        if (rec.time <= tau) {
            if (rec.status > 0)
                ++g.n_events_by_tau[a];
            else
                ++g.n_censored_by_tau[a];
        }
    }
    for (int a = 0; a < 2; ++a) {
        if (g.n_arm[a] == 0) throw EmptyArm("arm " + std::to_string(a) + " has no records");
        if (g.n_r_effective[a] == 0)
            throw PositivityViolation("arm " + std::to_string(a) +
                                      " has no records with an observed score beyond the landmark");
    }
    return g;
}

} // namespace truncscore
