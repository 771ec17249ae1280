// geope — positional-encoding analysis CLI.
//
// Subcommands:
//   verify  run the full property suite, report per-invariant results
//   table   emit per-position operator quaternions for a grid
//   decay   emit the distance profile of the leading attention-score term
//   attn    run desk-scale attention and emit trace + distance metrics
//   bench   time encode+score per positional-encoding mode
//
// Exit codes: 0 success, 1 property/assertion failure, 2 configuration
// error, 3 I/O error.

#include <algorithm>
#include <chrono>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "geope/attention.hpp"
#include "geope/csv.hpp"
#include "geope/verify.hpp"
#include "geope/version.hpp"

using nlohmann::json;

namespace {

struct Options {
    int dim = 48;
    double base = 100.0;
    std::string grid = "14x14";
    std::string mode;
    std::string index_convention = "zero";
    std::string exp_sign = "neg";
    std::uint64_t seed = 0;
    int draws = 200;
    int dmax = 32;
    std::string offset = "0,0";
    std::string out;
    std::string format = "csv";
    std::string config_file;
};

void add_common_options(CLI::App* cmd, Options& o) {
    const auto take_last = CLI::MultiOptionPolicy::TakeLast;
    cmd->add_option("--dim", o.dim, "head dimension d")->multi_option_policy(take_last);
    cmd->add_option("--base", o.base, "frequency base lambda")->multi_option_policy(take_last);
    cmd->add_option("--grid", o.grid, "grid HxW or DxHxW")->multi_option_policy(take_last);
    cmd->add_option("--mode", o.mode, "mode (see README per command)")
        ->multi_option_policy(take_last);
    cmd->add_option("--index-convention", o.index_convention, "zero|one")
        ->multi_option_policy(take_last);
    cmd->add_option("--exp-sign", o.exp_sign, "pos|neg")->multi_option_policy(take_last);
    cmd->add_option("--seed", o.seed, "RNG seed")->multi_option_policy(take_last);
    cmd->add_option("--draws", o.draws, "random feature draws")->multi_option_policy(take_last);
    cmd->add_option("--dmax", o.dmax, "largest displacement distance")
        ->multi_option_policy(take_last);
    cmd->add_option("--offset", o.offset, "global grid translation dh,dw")
        ->multi_option_policy(take_last);
    cmd->add_option("--out", o.out, "output path (attn: path prefix)")
        ->multi_option_policy(take_last);
    cmd->add_option("--format", o.format, "csv|json")->multi_option_policy(take_last);
    cmd->add_option("--config", o.config_file, "key=value config file; flags override")
        ->multi_option_policy(take_last);
}

geope::GridDims parse_grid(const std::string& text) {
    std::vector<int> parts;
    std::string cur;
    for (const char c : text + "x") {
        if (c == 'x' || c == 'X') {
            if (cur.empty()) throw geope::ConfigError("bad grid '" + text + "'");
            try {
                parts.push_back(std::stoi(cur));
            } catch (const std::exception&) {
                throw geope::ConfigError("bad grid '" + text + "'");
            }
            cur.clear();
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            cur += c;
        } else {
            throw geope::ConfigError("bad grid '" + text + "'");
        }
    }
    geope::GridDims dims;
    if (parts.size() == 2) {
        dims.rows = parts[0];
        dims.cols = parts[1];
    } else if (parts.size() == 3) {
        dims.depth = parts[0];
        dims.rows = parts[1];
        dims.cols = parts[2];
    } else {
        throw geope::ConfigError("grid must be HxW or DxHxW, got '" + text + "'");
    }
    if (dims.depth < 1 || dims.rows < 1 || dims.cols < 1)
        throw geope::ConfigError("grid dimensions must be >= 1");
    return dims;
}

std::pair<int, int> parse_offset(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos)
        throw geope::ConfigError("offset must be dh,dw, got '" + text + "'");
    try {
        return {std::stoi(text.substr(0, comma)), std::stoi(text.substr(comma + 1))};
    } catch (const std::exception&) {
        throw geope::ConfigError("offset must be dh,dw, got '" + text + "'");
    }
}

geope::PhaseSchedule make_schedule(const Options& o) {
    geope::PhaseSchedule s;
    s.base_lambda = o.base;
    s.head_dim = o.dim;
    if (o.index_convention == "zero") {
        s.index_convention = geope::IndexConvention::ZeroBased;
    } else if (o.index_convention == "one") {
        s.index_convention = geope::IndexConvention::OneBased;
    } else {
        throw geope::ConfigError("index-convention must be zero|one");
    }
    if (o.exp_sign == "neg") {
        s.exponent_sign = geope::ExponentSign::Negative;
    } else if (o.exp_sign == "pos") {
        s.exponent_sign = geope::ExponentSign::Positive;
    } else {
        throw geope::ConfigError("exp-sign must be pos|neg");
    }
    return s;
}

geope::PeMode parse_pe_mode(const std::string& text) {
    if (text == "none") return geope::PeMode::None;
    if (text == "rope1d") return geope::PeMode::Rope1d;
    if (text == "geope1d") return geope::PeMode::Geope1d;
    if (text == "geope2d") return geope::PeMode::Geope2d;
    if (text == "geope3d") return geope::PeMode::Geope3d;
    if (text == "lingeope2d") return geope::PeMode::LinGeope2d;
    throw geope::ConfigError("unknown pe mode '" + text + "'");
}

const char* pe_mode_name(geope::PeMode mode) {
    switch (mode) {
        case geope::PeMode::None: return "none";
        case geope::PeMode::Rope1d: return "rope1d";
        case geope::PeMode::Geope1d: return "geope1d";
        case geope::PeMode::Geope2d: return "geope2d";
        case geope::PeMode::Geope3d: return "geope3d";
        case geope::PeMode::LinGeope2d: return "lingeope2d";
    }
    return "?";
}

json meta_json(const std::string& command, const Options& o) {
    json meta;
    meta["tool"] = "geope";
    meta["version"] = geope::kVersion;
    meta["command"] = command;
    meta["dim"] = o.dim;
    meta["base"] = o.base;
    meta["grid"] = o.grid;
    meta["mode"] = o.mode;
    meta["index_convention"] = o.index_convention;
    meta["exp_sign"] = o.exp_sign;
    meta["seed"] = o.seed;
    return meta;
}

json table_to_json(const geope::CsvTable& table, const json& meta) {
    json rows = json::array();
    for (size_t r = 0; r < table.rows.size(); ++r) {
        json rec;
        for (size_t c = 0; c < table.header.size(); ++c) {
            const std::string& cell = table.rows[r][c];
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end != cell.c_str() && *end == '\0') {
                rec[table.header[c]] = v;
            } else {
                rec[table.header[c]] = cell;
            }
        }
        rows.push_back(std::move(rec));
    }
    json out;
    out["meta"] = meta;
    out["rows"] = std::move(rows);
    return out;
}

/// Serializes a table per --format and writes it to --out or stdout.
void emit(const geope::CsvTable& table, const json& meta, const Options& o) {
    std::string text;
    if (o.format == "csv") {
        text = table.to_string();
    } else if (o.format == "json") {
        text = table_to_json(table, meta).dump(2) + "\n";
    } else {
        throw geope::ConfigError("format must be csv|json");
    }
    if (o.out.empty()) {
        std::cout << text;
    } else {
        geope::write_file(o.out, text);
    }
}

// --- config file handling ---

const std::set<std::string>& allowed_config_keys() {
    static const std::set<std::string> keys = {
        "dim",  "base",  "grid", "mode",   "index-convention", "exp-sign",
        "seed", "draws", "dmax", "offset", "out",              "format"};
    return keys;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

/// key=value per line, # comments. Returns CLI-style tokens to inject before
/// the explicit flags so that flags override the file.
std::vector<std::string> load_config_tokens(const std::string& path) {
    std::istringstream in(geope::read_file(path));
    std::vector<std::string> tokens;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw geope::ConfigError(path + ":" + std::to_string(lineno) +
                                     ": expected key=value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!allowed_config_keys().count(key)) {
            throw geope::ConfigError(path + ":" + std::to_string(lineno) + ": unknown key '" +
                                     key + "'");
        }
        if (value.empty()) {
            throw geope::ConfigError(path + ":" + std::to_string(lineno) + ": empty value for '" +
                                     key + "'");
        }
        tokens.push_back("--" + key + "=" + value);
    }
    return tokens;
}

/// Rewrites argv so config-file tokens precede the user's flags.
std::vector<std::string> inject_config(const std::vector<std::string>& args) {
    std::string config_path;
    for (size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    }
    if (config_path.empty()) return args;

    // Injected tokens follow the subcommand so they bind to its options.
    static const std::set<std::string> kSubcommands = {"verify", "table", "decay", "attn",
                                                       "bench"};
    std::vector<std::string> out;
    size_t insert_after = 0;
    for (size_t i = 0; i < args.size(); ++i) {
        if (kSubcommands.count(args[i])) {
            insert_after = i + 1;
            break;
        }
    }
    const std::vector<std::string> injected = load_config_tokens(config_path);
    out.insert(out.end(), args.begin(), args.begin() + static_cast<std::ptrdiff_t>(insert_after));
    out.insert(out.end(), injected.begin(), injected.end());
    out.insert(out.end(), args.begin() + static_cast<std::ptrdiff_t>(insert_after), args.end());
    return out;
}

// --- commands ---

int cmd_verify(const Options& o) {
    // The suite itself is fixed; the echoed configuration must still be
    // coherent (dimension gates included) before any computation starts.
    const geope::PhaseSchedule schedule = make_schedule(o);
    if (!o.mode.empty()) {
        geope::AttentionConfig probe;
        probe.head_dim = o.dim;
        probe.grid = parse_grid(o.grid);
        probe.pe_mode = parse_pe_mode(o.mode);
        probe.schedule = schedule;
        probe.validate();
    } else if (o.dim % 3 != 0 && o.dim % 2 != 0) {
        throw geope::ConfigError("dim " + std::to_string(o.dim) +
                                 " fits neither pair nor triple sub-vectors");
    }

    const geope::VerifyReport report = geope::run_verify_suite(o.seed);

    geope::CsvTable table;
    table.header = {"property", "samples", "observed", "bound", "status"};
    for (const geope::PropertyResult& p : report.properties) {
        table.push_row({p.name, std::to_string(p.samples), geope::format_double(p.observed),
                        geope::format_double(p.bound), p.pass ? "pass" : "fail"});
    }
    emit(table, meta_json("verify", o), o);

    size_t failed = 0;
    for (const geope::PropertyResult& p : report.properties) {
        if (!p.pass) {
            ++failed;
            std::cerr << "FAIL " << p.name << " observed=" << geope::format_double(p.observed)
                      << " bound=" << geope::format_double(p.bound) << "\n";
        }
    }
    std::cerr << report.properties.size() - failed << "/" << report.properties.size()
              << " properties passed\n";
    return report.all_pass() ? 0 : 1;
}

int cmd_table(const Options& o) {
    const geope::PhaseSchedule schedule = make_schedule(o);
    const geope::GridDims grid = parse_grid(o.grid);
    const std::string mode_name = o.mode.empty() ? "two_d" : o.mode;

    geope::Mode mode;
    if (mode_name == "one_d") mode = geope::Mode::OneD;
    else if (mode_name == "two_d") mode = geope::Mode::TwoD;
    else if (mode_name == "three_d") mode = geope::Mode::ThreeD;
    else throw geope::ConfigError("table mode must be one_d|two_d|three_d");

    schedule.validate(mode == geope::Mode::OneD ? 2 : 3);

    geope::CsvTable table;
    if (mode == geope::Mode::OneD) {
        table.header = {"mode", "p", "i", "theta", "qw", "qx", "qy", "qz"};
    } else if (mode == geope::Mode::TwoD) {
        table.header = {"mode", "p_h", "p_w", "i", "theta_h", "theta_w",
                        "qw",   "qx",  "qy",  "qz"};
    } else {
        table.header = {"mode",    "p_d",     "p_h",     "p_w", "i",  "theta_d",
                        "theta_h", "theta_w", "qw",      "qx",  "qy", "qz"};
    }

    const int lo = schedule.index_convention == geope::IndexConvention::ZeroBased ? 0 : 1;
    const auto fd = geope::format_double;

    if (mode == geope::Mode::OneD) {
        const int blocks = o.dim / 2;
        for (int p = 0; p < grid.rows * grid.cols; ++p) {
            for (int b = 0; b < blocks; ++b) {
                const double theta = geope::phase_1d(p, lo + b, schedule);
                const geope::UnitQuaternion q = geope::build_1d(theta);
                table.push_row({mode_name, std::to_string(p), std::to_string(lo + b), fd(theta),
                                fd(q.w), fd(q.x), fd(q.y), fd(q.z)});
            }
        }
    } else {
        const int blocks = o.dim / 3;
        if (o.dim % 3 != 0) throw geope::ConfigError("table: dim must be divisible by 3");
        for (int d = 0; d < (mode == geope::Mode::ThreeD ? grid.depth : 1); ++d) {
            for (int h = 0; h < grid.rows; ++h) {
                for (int w = 0; w < grid.cols; ++w) {
                    for (int b = 0; b < blocks; ++b) {
                        geope::GridPosition pos{std::nullopt, h, w};
                        if (mode == geope::Mode::ThreeD) pos.p_d = d;
                        const geope::Phases ph = geope::phases(pos, lo + b, schedule);
                        geope::UnitQuaternion q = geope::UnitQuaternion::identity();
                        if (mode == geope::Mode::TwoD) {
                            q = geope::build_2d(ph.theta_h, ph.theta_w);
                            table.push_row({mode_name, std::to_string(h), std::to_string(w),
                                            std::to_string(lo + b), fd(ph.theta_h),
                                            fd(ph.theta_w), fd(q.w), fd(q.x), fd(q.y), fd(q.z)});
                        } else {
                            q = geope::build_3d(*ph.theta_d, ph.theta_h, ph.theta_w);
                            table.push_row({mode_name, std::to_string(d), std::to_string(h),
                                            std::to_string(w), std::to_string(lo + b),
                                            fd(*ph.theta_d), fd(ph.theta_h), fd(ph.theta_w),
                                            fd(q.w), fd(q.x), fd(q.y), fd(q.z)});
                        }
                    }
                }
            }
        }
    }
    emit(table, meta_json("table", o), o);
    return 0;
}

int cmd_decay(const Options& o) {
    if (o.dmax < 0) throw geope::ConfigError("dmax must be >= 0");
    if (o.draws < 1) throw geope::ConfigError("draws must be >= 1");
    const bool negative = o.exp_sign == "neg";
    if (!negative && o.exp_sign != "pos") throw geope::ConfigError("exp-sign must be pos|neg");

    const std::vector<geope::DecayRow> rows =
        geope::decay_profile(o.dim, o.base, negative, o.dmax, o.draws, o.seed);

    geope::CsvTable table;
    table.header = {"distance", "mean_abs_score", "std_abs_score"};
    for (const geope::DecayRow& r : rows) {
        table.push_row({geope::format_double(r.distance), geope::format_double(r.mean_abs_score),
                        geope::format_double(r.std_abs_score)});
    }
    json meta = meta_json("decay", o);
    meta["draws"] = o.draws;
    meta["dmax"] = o.dmax;
    emit(table, meta, o);
    return 0;
}

int cmd_attn(const Options& o) {
    if (o.out.empty()) throw geope::ConfigError("attn requires --out PATH (used as a prefix)");
    const auto [offset_h, offset_w] = parse_offset(o.offset);

    geope::AttentionConfig cfg;
    cfg.heads = 4;
    cfg.head_dim = o.dim;
    cfg.grid = parse_grid(o.grid);
    cfg.pe_mode = o.mode.empty() ? geope::PeMode::Geope2d : parse_pe_mode(o.mode);
    cfg.schedule = make_schedule(o);
    cfg.seed = o.seed;
    cfg.offset_h = offset_h;
    cfg.offset_w = offset_w;
    cfg.validate();

    const geope::QkTensors qk = geope::make_gaussian_qk(cfg);
    const geope::AttentionTrace trace = geope::attention_scores(geope::encode_qk(qk, cfg), cfg);

    geope::CsvTable trace_table;
    trace_table.header = {"head", "query_index", "key_index", "weight"};
    for (int h = 0; h < trace.heads; ++h) {
        for (int qi = 0; qi < trace.tokens; ++qi) {
            for (int ki = 0; ki < trace.tokens; ++ki) {
                trace_table.push_row(
                    {std::to_string(h), std::to_string(qi), std::to_string(ki),
                     geope::format_double(trace.scores[trace.score_index(h, qi, ki)])});
            }
        }
    }

    geope::CsvTable metric_table;
    metric_table.header = {"head", "mean_attention_distance"};
    for (int h = 0; h < trace.heads; ++h) {
        metric_table.push_row(
            {std::to_string(h),
             geope::format_double(trace.mean_distance_per_head[static_cast<size_t>(h)])});
    }

    json meta = meta_json("attn", o);
    meta["mode"] = pe_mode_name(cfg.pe_mode);
    meta["heads"] = cfg.heads;
    meta["offset_h"] = offset_h;
    meta["offset_w"] = offset_w;
    meta["tokens"] = trace.tokens;
    meta["mean_attention_distance"] = trace.mean_distance;
    meta["distance_normalization"] = "averaged over queries, then over heads";

    if (o.format == "csv") {
        geope::write_file(o.out + ".trace.csv", trace_table.to_string());
        geope::write_file(o.out + ".metrics.csv", metric_table.to_string());
    } else if (o.format == "json") {
        geope::write_file(o.out + ".trace.json", table_to_json(trace_table, meta).dump(2) + "\n");
        geope::write_file(o.out + ".metrics.json",
                          table_to_json(metric_table, meta).dump(2) + "\n");
    } else {
        throw geope::ConfigError("format must be csv|json");
    }
    geope::write_file(o.out + ".meta.json", meta.dump(2) + "\n");
    return 0;
}

int cmd_bench(const Options& o) {
    const geope::GridDims grid = parse_grid(o.grid);
    std::vector<std::string> modes;
    {
        std::string cur;
        const std::string src =
            (o.mode.empty() ? "none,rope1d,geope1d,geope2d,geope3d,lingeope2d" : o.mode) + ",";
        for (const char c : src) {
            if (c == ',') {
                if (!cur.empty()) modes.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
    }

    constexpr int kWarmups = 5;
    constexpr int kReps = 20;

    geope::CsvTable table;
    table.header = {"mode",   "reps",      "warmups",       "min_ms",
                    "median_ms", "max_ms", "cache_entries", "cache_bytes"};

    for (const std::string& mode_name : modes) {
        geope::AttentionConfig cfg;
        cfg.heads = 12;
        cfg.head_dim = o.dim;
        cfg.grid = grid;
        cfg.pe_mode = parse_pe_mode(mode_name);
        cfg.schedule = make_schedule(o);
        cfg.seed = o.seed;
        cfg.validate();

        const geope::QkTensors qk = geope::make_gaussian_qk(cfg);
        std::vector<double> times_ms;
        times_ms.reserve(kReps);
        for (int rep = 0; rep < kWarmups + kReps; ++rep) {
            const auto start = std::chrono::steady_clock::now();
            const geope::AttentionTrace trace =
                geope::attention_scores(geope::encode_qk(qk, cfg), cfg);
            const auto stop = std::chrono::steady_clock::now();
            // Touch the result so the work cannot be elided.
            if (trace.scores.empty()) throw geope::Error("bench: empty trace");
            if (rep >= kWarmups) {
                times_ms.push_back(
                    std::chrono::duration<double, std::milli>(stop - start).count());
            }
        }
        std::sort(times_ms.begin(), times_ms.end());
        const double median = times_ms[times_ms.size() / 2];

        size_t cache_entries = 0;
        size_t cache_bytes = 0;
        if (cfg.pe_mode == geope::PeMode::LinGeope2d) {
            const geope::DisplacementTable dt(grid.rows, grid.cols, cfg.schedule);
            cache_entries = dt.entry_count();
            cache_bytes = dt.memory_bytes();
        }
        table.push_row({mode_name, std::to_string(kReps), std::to_string(kWarmups),
                        geope::format_double(times_ms.front()), geope::format_double(median),
                        geope::format_double(times_ms.back()), std::to_string(cache_entries),
                        std::to_string(cache_bytes)});
    }
    emit(table, meta_json("bench", o), o);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"GeoPE positional-encoding kernels and analysis", "geope"};
    app.require_subcommand(1);

    Options opt;
    CLI::App* verify = app.add_subcommand("verify", "run the property suite");
    CLI::App* table = app.add_subcommand("table", "emit operator table for a grid");
    CLI::App* decay = app.add_subcommand("decay", "emit score-decay profile");
    CLI::App* attn = app.add_subcommand("attn", "run desk-scale attention");
    CLI::App* bench = app.add_subcommand("bench", "time encode+score per mode");
    for (CLI::App* cmd : {verify, table, decay, attn, bench}) add_common_options(cmd, opt);

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = inject_config(args);
        // CLI11 consumes reversed argv.
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const geope::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const geope::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (verify->parsed()) return cmd_verify(opt);
        if (table->parsed()) return cmd_table(opt);
        if (decay->parsed()) return cmd_decay(opt);
        if (attn->parsed()) return cmd_attn(opt);
        if (bench->parsed()) return cmd_bench(opt);
        std::cerr << "no command given\n";
        return 2;
    } catch (const geope::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const geope::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const geope::DimensionMismatch& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
