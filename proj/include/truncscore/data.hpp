#ifndef TRUNCSCORE_DATA_HPP
#define TRUNCSCORE_DATA_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "truncscore/errors.hpp"

namespace truncscore {

// One subject: treatment arm, baseline covariates, follow-up time with cause
// (0 = censored, >0 = terminal event), score-availability indicator r, and the
// clinical score y (present iff r == 1).
struct SubjectRecord {
    int a = 0;
    double x1 = 0.0;
    double x2 = 0.0;
    double time = 0.0;
    int status = 0;
    int r = 0;
    std::optional<double> y;
};

struct Dataset {
    std::vector<SubjectRecord> records;
    std::size_t n() const { return records.size(); }
};

// Landmark at which survival status and the score are assessed.
struct LandmarkSpec {
    double tau = 2.0;
};

// Column-name mapping for CSV input; defaults match the simulated exports.
struct CsvSchema {
    std::string a = "a";
    std::string x1 = "x1";
    std::string x2 = "x2";
    std::string y = "y";
    std::string time = "time";
    std::string r = "r";
    std::string status = "status";
};

// Reads a comma-separated file with a header row.  Missing y is an empty
// field or NA (case-insensitive).  Malformed numbers raise ParseError with
// the 1-based data row index; missing columns raise SchemaError; invalid
// field combinations raise ValidationError with the row index.
Dataset read_csv(std::istream& in, const CsvSchema& schema = CsvSchema());
Dataset read_csv_file(const std::string& path, const CsvSchema& schema = CsvSchema());

// Writes the default-schema CSV; missing y is written as NA.  Full precision,
// so write/read round-trips reproduce the dataset exactly.
void write_csv(std::ostream& out, const Dataset& d);
void write_csv_file(const std::string& path, const Dataset& d);

// Summary counts used by the estimators and surfaced by the CLI.  A score is
// only usable when the subject is still at risk at tau, so r_effective means
// r == 1 and time > tau.
struct Diagnostics {
    std::size_t n = 0;
    std::size_t n_arm[2] = {0, 0};
    std::size_t n_r_raw[2] = {0, 0};        // r == 1 per arm
    std::size_t n_r_effective[2] = {0, 0};  // r == 1 and time > tau
    std::size_t n_events_by_tau[2] = {0, 0};
    std::size_t n_censored_by_tau[2] = {0, 0};
    std::size_t n_score_before_tau = 0;     // r == 1 with time <= tau (score unused)
    std::size_t n_missing_survivor = 0;     // r == 0 with time > tau
};

// Computes diagnostics and enforces the hard preconditions for estimation:
// both arms present (EmptyArm) and at least one effective score per arm
// (PositivityViolation).
Diagnostics validate_for_estimation(const Dataset& d, const LandmarkSpec& landmark);

} // namespace truncscore

#endif
