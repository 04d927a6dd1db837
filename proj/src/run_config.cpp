#include "k3glue/run_config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "k3glue/errors.hpp"

namespace k3glue {

namespace {

struct Cursor {
    std::string file;
    int line = 0;
    [[noreturn]] void fail(const std::string& what) const
    {
        throw ConfigError(file + ":" + std::to_string(line) + ": " + what);
    }
};

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_real(const std::string& tok, const Cursor& at)
{
    // Accept 2^-5 style dyadic values.
    const auto caret = tok.find('^');
    try {
        if (caret != std::string::npos) {
            const double base = std::stod(tok.substr(0, caret));
            const double expo = std::stod(tok.substr(caret + 1));
            return std::pow(base, expo);
        }
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) at.fail("trailing characters in number '" + tok + "'");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        at.fail("expected a number, got '" + tok + "'");
    }
}

std::vector<double> parse_reals(const std::string& value, const Cursor& at)
{
    std::vector<double> out;
    std::istringstream ss(value);
    std::string tok;
    while (ss >> tok) out.push_back(parse_real(tok, at));
    return out;
}

int parse_int(const std::string& value, const Cursor& at)
{
    const double v = parse_real(value, at);
    const int i = static_cast<int>(std::lround(v));
    if (std::abs(v - i) > 1e-12) at.fail("expected an integer, got '" + value + "'");
    return i;
}

} // namespace

RunConfig RunConfig::parse(std::istream& in, const std::string& name)
{
    RunConfig cfg;
    Cursor at{name, 0};
    std::string section;
    bool have_schema = false, have_weights = false;
    PairSpec pending_pair{Vector3::Zero(), 0};
    bool pair_open = false, pair_has_pos = false;

    auto close_pair = [&]() {
        if (!pair_open) return;
        if (!pair_has_pos) at.fail("[pair] section missing 'position'");
        if (pending_pair.weight < 1) at.fail("[pair] section missing 'k'");
        cfg.pairs.push_back(pending_pair);
        pair_open = false;
    };

    std::string raw;
    while (std::getline(in, raw)) {
        ++at.line;
        const auto hash = raw.find('#');
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') at.fail("malformed section header '" + line + "'");
            close_pair();
            section = line.substr(1, line.size() - 2);
            if (section == "pair") {
                pair_open = true;
                pair_has_pos = false;
                pending_pair = {Vector3::Zero(), 0};
            } else if (section != "torus" && section != "weights" && section != "run") {
                at.fail("unknown section [" + section + "]");
            }
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) at.fail("expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (value.empty()) at.fail("empty value for key '" + key + "'");

        if (section.empty()) {
            if (key == "schema_version") {
                cfg.schema_version = parse_int(value, at);
                if (cfg.schema_version != 1)
                    at.fail("unsupported schema_version " + std::to_string(cfg.schema_version));
                have_schema = true;
            } else {
                at.fail("unknown top-level key '" + key + "'");
            }
        } else if (section == "torus") {
            if (key == "basis") {
                const auto v = parse_reals(value, at);
                if (v.size() != 9) at.fail("basis needs 9 numbers (columns concatenated)");
                for (int c = 0; c < 3; ++c)
                    for (int r = 0; r < 3; ++r) cfg.basis(r, c) = v[static_cast<std::size_t>(3 * c + r)];
            } else {
                at.fail("unknown key '" + key + "' in [torus]");
            }
        } else if (section == "weights") {
            if (key == "m") {
                const auto v = parse_reals(value, at);
                if (v.size() != 8) at.fail("m needs exactly 8 weights");
                for (int j = 0; j < 8; ++j) {
                    const int w = static_cast<int>(std::lround(v[static_cast<std::size_t>(j)]));
                    if (w < 0) at.fail("dihedral weights must be non-negative");
                    cfg.dihedral_weights[static_cast<std::size_t>(j)] = w;
                }
                have_weights = true;
            } else {
                at.fail("unknown key '" + key + "' in [weights]");
            }
        } else if (section == "pair") {
            if (key == "position") {
                const auto v = parse_reals(value, at);
                if (v.size() != 3) at.fail("position needs 3 fractional coordinates");
                pending_pair.position = Vector3(v[0], v[1], v[2]);
                pair_has_pos = true;
            } else if (key == "k") {
                pending_pair.weight = parse_int(value, at);
                if (pending_pair.weight < 1) at.fail("pair weight k must be >= 1");
            } else {
                at.fail("unknown key '" + key + "' in [pair]");
            }
        } else if (section == "run") {
            if (key == "epsilons") {
                cfg.epsilons = parse_reals(value, at);
                for (double e : cfg.epsilons)
                    if (!(e > 0.0 && e < 1.0)) at.fail("epsilons must lie in (0, 1)");
            } else if (key == "beta") {
                cfg.beta = parse_real(value, at);
            } else if (key == "grid_dirs") {
                cfg.grid_dirs = parse_int(value, at);
            } else if (key == "grid_rho") {
                cfg.grid_rho = parse_int(value, at);
            } else if (key == "collapse_grid") {
                cfg.collapse_grid = parse_int(value, at);
            } else if (key == "tol_profile") {
                if (value != "strict" && value != "fast")
                    at.fail("tol_profile must be 'strict' or 'fast'");
                cfg.tol_profile = value;
            } else if (key == "out") {
                cfg.out_dir = value;
            } else if (key == "cache") {
                cfg.cache_dir = value;
            } else if (key == "threads") {
                cfg.threads = parse_int(value, at);
            } else {
                at.fail("unknown key '" + key + "' in [run]");
            }
        }
    }
    close_pair();
    if (!have_schema) throw ConfigError(name + ": missing schema_version");
    if (!have_weights) throw ConfigError(name + ": missing [weights] m = ...");
    if (cfg.epsilons.empty())
        for (int s = 5; s <= 9; ++s) cfg.epsilons.push_back(std::pow(2.0, -s));
    return cfg;
}

RunConfig RunConfig::parse_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse(in, path);
}

ChargeConfig RunConfig::charge_config() const
{
    return ChargeConfig(torus(), dihedral_weights, pairs);
}

} // namespace k3glue
