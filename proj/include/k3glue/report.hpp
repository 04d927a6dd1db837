#pragma once

/// Per-check records with pass/fail against expected bands, emitted both as a
/// human-readable table and a machine-readable CSV.

#include <ostream>
#include <string>
#include <vector>

namespace k3glue {

struct CheckRecord {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double lo = 0.0;  // expected band [lo, hi]
    double hi = 0.0;
    std::string provenance;  // origin of the expectation
    bool acceptance = true;  // participates in the exit code
    std::string note;
};

class Report {
public:
    void add(const CheckRecord& record) { records_.push_back(record); }

    /// Band check convenience: pass iff lo <= measured <= hi.
    void check(const std::string& name, double measured, double lo, double hi,
               const std::string& provenance, bool acceptance = true,
               const std::string& note = "");

    const std::vector<CheckRecord>& records() const { return records_; }
    bool all_acceptance_pass() const;
    int exit_code() const { return all_acceptance_pass() ? 0 : 1; }

    void write_table(std::ostream& out) const;
    void write_csv(const std::string& path) const;

private:
    std::vector<CheckRecord> records_;
};

} // namespace k3glue
