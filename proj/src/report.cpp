#include "k3glue/report.hpp"

#include <iomanip>
#include <sstream>

#include "k3glue/csv.hpp"

namespace k3glue {

void Report::check(const std::string& name, double measured, double lo, double hi,
                   const std::string& provenance, bool acceptance, const std::string& note)
{
    CheckRecord r;
    r.name = name;
    r.measured = measured;
    r.lo = lo;
    r.hi = hi;
    r.pass = measured >= lo && measured <= hi;
    r.provenance = provenance;
    r.acceptance = acceptance;
    r.note = note;
    records_.push_back(r);
}

bool Report::all_acceptance_pass() const
{
    for (const auto& r : records_)
        if (r.acceptance && !r.pass) return false;
    return true;
}

void Report::write_table(std::ostream& out) const
{
    out << std::left << std::setw(44) << "check" << std::setw(8) << "status" << std::setw(16)
        << "measured" << std::setw(26) << "expected" << "origin" << '\n';
    out << std::string(100, '-') << '\n';
    for (const auto& r : records_) {
        std::ostringstream band;
        band << "[" << std::setprecision(6) << r.lo << ", " << r.hi << "]";
        out << std::left << std::setw(44) << r.name << std::setw(8)
            << (r.pass ? "ok" : "FAIL") << std::setw(16) << std::setprecision(8) << r.measured
            << std::setw(26) << band.str() << r.provenance;
        if (!r.note.empty()) out << "  (" << r.note << ")";
        out << '\n';
    }
    out << std::string(100, '-') << '\n';
    out << (all_acceptance_pass() ? "all checks passed" : "FAILURES present") << '\n';
}

void Report::write_csv(const std::string& path) const
{
    CsvWriter csv(path, {"name", "status", "measured", "expected_lo", "expected_hi",
                         "provenance", "acceptance", "note"});
    for (const auto& r : records_)
        csv.row({r.name, r.pass ? "pass" : "fail", csv_double(r.measured), csv_double(r.lo),
                 csv_double(r.hi), r.provenance, r.acceptance ? "1" : "0", r.note});
}

} // namespace k3glue
