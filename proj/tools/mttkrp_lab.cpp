/*
Copyright 2026 The mttkrp-lab Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

// mttkrp_lab: command-line driver for the simulators, bound evaluators and
// planner. See README.md for usage.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mttkrp/mttkrp.hpp"

namespace {

using namespace mttkrp;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitVerify = 4;

constexpr double kBlockedTolerance = 1e-12;
constexpr double kParallelTolerance = 1e-12;

struct Options {
    std::string out;
    std::string synthetic;
    std::string input;
    int mode = 1;
    std::optional<long long> order;
    std::string dims;
    std::optional<long long> rank;
    std::optional<std::string> memory;
    std::optional<long long> block;
    std::string alg;
    std::string grid;
    std::string arith = "atomic";
    std::string procs;
    double gamma = 1.0;
    double delta = 1.0;
    bool warm_start = false;
    bool verify = false;
    std::optional<unsigned long long> seed;
    bool fig3 = false;
    std::string dat;
    std::string mm_model = "recursive";
};

class VerificationFailure : public Error {
  public:
    using Error::Error;
};

/// Integer with optional `b^e` power shorthand.
Count parse_count(const std::string& text, const std::string& what) {
    const auto caret = text.find('^');
    try {
        if (caret == std::string::npos) {
            std::size_t used = 0;
            const long long v = std::stoll(text, &used);
            if (used != text.size()) {
                throw std::invalid_argument(text);
            }
            return v;
        }
        const long long base = std::stoll(text.substr(0, caret));
        const int exp = std::stoi(text.substr(caret + 1));
        if (exp < 0 || exp > 120) {
            throw std::invalid_argument(text);
        }
        Count v = 1;
        for (int i = 0; i < exp; ++i) {
            v *= base;
        }
        return v;
    } catch (const std::logic_error&) {
        throw InvalidInput("bad " + what + " '" + text + "'");
    }
}

/// `--dims`: `4,4,4`, `4x4x4`, `16^3` (16 repeated three times) or a
/// single edge repeated N times.
std::vector<Index> parse_dims(const std::string& text, std::optional<long long> order) {
    std::vector<Index> dims;
    const auto caret = text.find('^');
    if (caret != std::string::npos) {
        const Count edge = parse_count(text.substr(0, caret), "dimension");
        const Count reps = parse_count(text.substr(caret + 1), "dimension count");
        if (reps < 1 || reps > static_cast<Count>(kMaxRegionRank)) {
            throw InvalidInput("bad dimension count in '" + text + "'");
        }
        dims.assign(static_cast<std::size_t>(reps), static_cast<Index>(edge));
    } else {
        std::string tok;
        std::stringstream ss(text);
        const char sep = text.find(',') != std::string::npos ? ',' : 'x';
        while (std::getline(ss, tok, sep)) {
            dims.push_back(static_cast<Index>(parse_count(tok, "dimension")));
        }
    }
    if (order) {
        if (dims.size() == 1) {
            dims.assign(static_cast<std::size_t>(*order), dims.front());
        } else if (static_cast<long long>(dims.size()) != *order) {
            throw InvalidInput("-N " + std::to_string(*order) + " disagrees with --dims " + text);
        }
    }
    if (dims.empty()) {
        throw InvalidInput("--dims is empty");
    }
    return dims;
}

/// `--P`: comma list of counts, each `k`, `b^e`, or a range `2^a..2^b`
/// stepping by powers of two.
std::vector<Count> parse_procs(const std::string& text) {
    std::vector<Count> out;
    std::string tok;
    std::stringstream ss(text);
    while (std::getline(ss, tok, ',')) {
        const auto dots = tok.find("..");
        if (dots == std::string::npos) {
            out.push_back(parse_count(tok, "processor count"));
            continue;
        }
        Count lo = parse_count(tok.substr(0, dots), "processor range");
        const Count hi = parse_count(tok.substr(dots + 2), "processor range");
        if (lo < 1 || hi < lo) {
            throw InvalidInput("bad processor range '" + tok + "'");
        }
        for (; lo <= hi; lo *= 2) {
            out.push_back(lo);
        }
    }
    if (out.empty()) {
        throw InvalidInput("--P is empty");
    }
    return out;
}

std::size_t zero_based_mode(const Options& o, std::size_t order) {
    if (o.mode < 1 || static_cast<std::size_t>(o.mode) > order) {
        throw InvalidInput("--mode " + std::to_string(o.mode) + " out of range for order " + std::to_string(order));
    }
    return static_cast<std::size_t>(o.mode - 1);
}

bool has_data_source(const Options& o) { return !o.synthetic.empty() || !o.input.empty(); }

/// Quotes a CSV field that contains a comma or a quote.
std::string csv_field(const std::string& v) {
    if (v.find_first_of(",\"\n") == std::string::npos) {
        return v;
    }
    std::string out = "\"";
    for (char c : v) {
        out += c;
        if (c == '"') {
            out += '"';
        }
    }
    return out + "\"";
}

/// The problem source as a CSV field. Synthetic specs are echoed with the
/// seed actually used.
std::string source_label(const Options& o) {
    if (!o.synthetic.empty()) {
        SyntheticSpec spec = parse_synthetic(o.synthetic);
        if (o.seed && o.synthetic.find('@') == std::string::npos) {
            spec.seed = *o.seed;
        }
        std::string dims;
        for (Index d : spec.dims) {
            dims += (dims.empty() ? "" : ",") + std::to_string(d);
        }
        return csv_field(std::string(kSyntheticPrefix) + dims + ":" + std::to_string(spec.rank) + "@" +
                         std::to_string(spec.seed));
    }
    if (!o.input.empty()) {
        return csv_field(o.input);
    }
    return "shape";
}

MttkrpProblem load(const Options& o) {
    if (!o.synthetic.empty() && !o.input.empty()) {
        throw InvalidInput("give exactly one of --synthetic and --input");
    }
    std::string source = o.input;
    if (!o.synthetic.empty()) {
        source = o.synthetic.rfind(kSyntheticPrefix, 0) == 0 ? o.synthetic : kSyntheticPrefix + o.synthetic;
    }
    if (source.rfind(kSyntheticPrefix, 0) == 0) {
        SyntheticSpec spec = parse_synthetic(source);
        if (o.seed && source.find('@') == std::string::npos) {
            spec.seed = *o.seed;
        }
        return make_problem(spec, zero_based_mode(o, spec.dims.size()));
    }
    return load_problem(source, 0);
}

/// Shape from `-N/--dims/--R` when no data source is given.
MttkrpShape shape_from_flags(const Options& o) {
    if (o.dims.empty() || !o.rank) {
        throw InvalidInput("give a problem with --synthetic, --input, or --dims and --R");
    }
    MttkrpShape shape{parse_dims(o.dims, o.order), static_cast<Index>(*o.rank), 0};
    shape.mode = zero_based_mode(o, shape.dims.size());
    shape.validate();
    return shape;
}

class Output {
  public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) {
                throw InvalidInput("cannot write '" + path + "'");
            }
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

  private:
    std::unique_ptr<std::ofstream> file_;
};

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// ---------------------------------------------------------------------------

int cmd_seq(const Options& o) {
    if (!o.memory) {
        throw InvalidInput("seq needs --M");
    }
    const Count memory = parse_count(*o.memory, "--M");
    // Machine feasibility depends only on N, so it is reported before the
    // problem source is examined.
    std::optional<std::size_t> order;
    if (o.order) {
        order = static_cast<std::size_t>(*o.order);
    }
    const bool unblocked = o.alg == "unblocked";
    if (!unblocked && !o.alg.empty() && o.alg != "blocked") {
        throw InvalidInput("--alg must be blocked or unblocked for seq");
    }
    if (order && memory < unblocked_min_capacity(*order)) {
        throw InfeasibleMachine("M = " + to_string(memory) + " is below the minimum " +
                                to_string(unblocked_min_capacity(*order)) + " for order " + std::to_string(*order));
    }

    std::optional<MttkrpProblem> problem;
    MttkrpShape shape;
    if (has_data_source(o)) {
        problem.emplace(load(o));
        shape = problem->shape();
    } else {
        shape = shape_from_flags(o);
    }

    MemoryMachine machine(memory, MachineOptions{o.warm_start});
    Index b = 0;
    SeqResult res;
    if (unblocked) {
        res = problem ? mttkrp_seq_unblocked(*problem, machine) : trace_seq_unblocked(shape, machine);
    } else {
        b = o.block ? static_cast<Index>(*o.block) : choose_block_size(shape.order(), memory);
        res = problem ? mttkrp_seq_blocked(*problem, machine, b) : trace_seq_blocked(shape, machine, b);
    }

    std::string verified = "-";
    std::string error = "-";
    bool failed = false;
    if (o.verify) {
        if (!problem) {
            throw InvalidInput("--verify needs values (--synthetic or --input)");
        }
        const FactorMatrix want = mttkrp_oracle(*problem);
        const double err = max_relative_error(res.output, want);
        const bool ok = unblocked ? res.output == want : err <= kBlockedTolerance;
        verified = ok ? "pass" : "fail";
        error = fmt_double(err);
        failed = !ok;
    }

    Output out(o.out);
    out.stream() << LedgerRow::kHeader << ",n,words,warm_start,source,verify,max_rel_err\n";
    out.stream() << LedgerRow{unblocked ? "unblocked" : "blocked", shape.dims, shape.rank, memory, b, res.ledger}
                 << ',' << shape.mode + 1 << ',' << to_string(res.ledger.communication()) << ','
                 << (o.warm_start ? "on" : "off") << ',' << source_label(o) << ',' << verified << ',' << error
                 << '\n';
    if (failed) {
        throw VerificationFailure("sequential result does not match the oracle");
    }
    return kExitOk;
}

int cmd_par(const Options& o) {
    const MttkrpProblem problem = load(o);
    const MttkrpShape shape = problem.shape();
    const bool stationary = o.alg.empty() || o.alg == "stationary";
    if (!stationary && o.alg != "general") {
        throw InvalidInput("--alg must be stationary or general for par");
    }
    ArithMode arith = ArithMode::Atomic;
    if (o.arith == "krp") {
        arith = ArithMode::Krp;
    } else if (o.arith != "atomic") {
        throw InvalidInput("--arith must be atomic or krp");
    }
    ProcessorGrid grid;
    if (!o.grid.empty()) {
        grid = ProcessorGrid::parse(o.grid);
        if (grid.order() + 1 == shape.order()) {
            // Mode factors only: P_0 = 1.
            grid = ProcessorGrid::stationary(grid.factors());
        }
    } else if (!o.procs.empty()) {
        const auto ps = parse_procs(o.procs);
        if (ps.size() != 1) {
            throw InvalidInput("par takes a single --P");
        }
        grid = choose_grid(shape, ps.front(), stationary ? ParAlgorithm::Stationary : ParAlgorithm::General);
    } else {
        throw InvalidInput("par needs --grid or --P");
    }
    if (grid.order() != shape.order()) {
        throw InvalidInput("grid " + grid.to_string() + " does not match order " + std::to_string(shape.order()));
    }
    const ParOptions opts{arith};
    const ParResult res = stationary ? par_stationary_mttkrp(problem, grid, opts) : par_general_mttkrp(problem, grid, opts);

    std::string verified = "-";
    bool failed = false;
    if (o.verify) {
        const double err = max_relative_error(res.output, mttkrp_oracle(problem));
        failed = !(err <= kParallelTolerance);
        verified = (failed ? "fail:" : "pass:") + fmt_double(err);
    }

    const std::string prefix = std::string(stationary ? "stationary" : "general") + ',' + to_string(arith) + ',' +
                               std::to_string(shape.order()) + ',' + join_dims(shape.dims) + ',' +
                               std::to_string(shape.rank) + ',' + std::to_string(shape.mode + 1) + ',' +
                               grid.to_string() + ',';
    Output out(o.out);
    std::ostream& os = out.stream();
    os << "alg,arith,N,dims,R,n,grid,proc,sent,received,words,additions,nary,arith_ops,storage,"
          "predicted,mean_words,gamma,delta,verify,traffic,source\n";
    const auto& procs = res.ledger.processors;
    for (std::size_t p = 0; p < procs.size(); ++p) {
        const auto& c = procs[p];
        const Count ops = static_cast<Count>(shape.order() - 1) * c.nary_multiplies + c.additions +
                          c.krp_multiplies + c.matmul_flops;
        os << prefix << p << ',' << to_string(c.words_sent) << ',' << to_string(c.words_received) << ','
           << to_string(c.words()) << ',' << to_string(c.additions) << ',' << to_string(c.nary_multiplies) << ','
           << to_string(ops) << ',' << to_string(c.storage) << ",-,-,-,-,-," << to_string(c.traffic()) << ','
           << source_label(o) << '\n';
    }
    Count max_sent = 0;
    Count max_recv = 0;
    Count max_add = 0;
    Count max_nary = 0;
    for (const auto& c : procs) {
        max_sent = std::max(max_sent, c.words_sent);
        max_recv = std::max(max_recv, c.words_received);
        max_add = std::max(max_add, c.additions);
        max_nary = std::max(max_nary, c.nary_multiplies);
    }
    os << prefix << "max," << to_string(max_sent) << ',' << to_string(max_recv) << ','
       << to_string(res.ledger.max_words()) << ',' << to_string(max_add) << ',' << to_string(max_nary) << ','
       << to_string(res.ledger.max_arithmetic(shape.order())) << ',' << to_string(res.ledger.max_storage()) << ','
       << to_string(predicted_words(shape, grid)) << ',' << format_wide(res.ledger.mean_words()) << ','
       << format_wide(res.gamma) << ',' << format_wide(res.delta) << ',' << verified << ','
       << to_string(res.ledger.max_traffic()) << ',' << source_label(o) << '\n';
    if (failed) {
        throw VerificationFailure("parallel result does not match the oracle");
    }
    return kExitOk;
}

int cmd_bounds(const Options& o) {
    if (o.dims.empty()) {
        throw InvalidInput("bounds needs --dims");
    }
    ProblemShape shape;
    shape.dims = parse_dims(o.dims, o.order);
    if (!o.rank) {
        throw InvalidInput("bounds needs --R");
    }
    shape.rank = static_cast<Index>(*o.rank);
    if (o.memory) {
        shape.memory = parse_count(*o.memory, "--M");
    }
    if (!o.procs.empty()) {
        const auto ps = parse_procs(o.procs);
        if (ps.size() != 1) {
            throw InvalidInput("bounds takes a single --P");
        }
        shape.processors = ps.front();
    }
    shape.gamma = o.gamma;
    shape.delta = o.delta;
    const BoundsReport report = evaluate_bounds(shape);

    Output out(o.out);
    std::ostream& os = out.stream();
    const std::string params = std::to_string(shape.order()) + ',' + join_dims(shape.dims) + ',' +
                               std::to_string(shape.rank) + ',' +
                               (shape.memory ? to_string(*shape.memory) : std::string("-")) + ',' +
                               (shape.processors ? to_string(*shape.processors) : std::string("-")) + ',' +
                               format_wide(shape.gamma) + ',' + format_wide(shape.delta);
    os << "kind,value,raw,note,N,dims,R,M,P,gamma,delta\n";
    auto row = [&](const char* kind, const std::optional<Bound>& b, const std::string& note) {
        if (b) {
            os << kind << ',' << format_wide(b->value) << ',' << format_wide(b->raw) << ',' << note << ',' << params
               << '\n';
        }
    };
    row("seq_memdep", report.seq_mem_dependent, "-");
    row("seq_trivial", report.seq_trivial, "-");
    row("par_memdep", report.par_mem_dependent, "-");
    row("par_memind_general", report.par_mem_independent_general, "-");
    row("par_memind_rect", report.par_mem_independent_rect, "-");
    if (report.par_combined) {
        const CombinedBound& c = *report.par_combined;
        row("par_combined", c.selected,
            c.regime == ParallelRegime::TensorDominated ? "tensor-dominated" : "factor-dominated");
    }
    return kExitOk;
}

int cmd_sweep(const Options& o) {
    SweepSpec spec;
    if (o.fig3) {
        spec = fig3_spec();
    } else {
        if (o.procs.empty()) {
            throw InvalidInput("sweep needs --fig3 or --P");
        }
        spec.shape = shape_from_flags(o);
        spec.processors = parse_procs(o.procs);
    }
    if (o.mm_model == "regime") {
        spec.matmul = MatmulModel::Regime;
    } else if (o.mm_model != "recursive") {
        throw InvalidInput("--mm-model must be recursive or regime");
    }
    const auto rows = scaling_sweep(spec);
    Output out(o.out);
    write_sweep_csv(out.stream(), spec, rows);
    if (!o.dat.empty()) {
        Output dat(o.dat);
        write_sweep_dat(dat.stream(), rows);
    }
    return kExitOk;
}

int cmd_verify(const Options& o) {
    const MttkrpProblem problem = load(o);
    const MttkrpShape shape = problem.shape();
    const FactorMatrix want = mttkrp_oracle(problem);
    const Count memory = o.memory ? parse_count(*o.memory, "--M") : blocked_footprint(shape.order(), 2);
    Count procs = 1;
    if (!o.procs.empty()) {
        procs = parse_procs(o.procs).front();
    }

    struct Row {
        std::string alg;
        std::string detail;
        double err;
        double tol;
        bool ok;
    };
    std::vector<Row> rows;
    {
        MemoryMachine m(memory);
        const auto r = mttkrp_seq_unblocked(problem, m);
        rows.push_back({"unblocked", "M=" + to_string(memory), max_relative_error(r.output, want), 0.0,
                        r.output == want});
    }
    {
        MemoryMachine m(memory);
        const Index b = o.block ? static_cast<Index>(*o.block) : choose_block_size(shape.order(), memory);
        const auto r = mttkrp_seq_blocked(problem, m, b);
        const double err = max_relative_error(r.output, want);
        rows.push_back({"blocked", "b=" + std::to_string(b), err, kBlockedTolerance, err <= kBlockedTolerance});
    }
    for (ParAlgorithm alg : {ParAlgorithm::Stationary, ParAlgorithm::General}) {
        const ProcessorGrid grid = choose_grid(shape, procs, alg);
        for (ArithMode arith : {ArithMode::Atomic, ArithMode::Krp}) {
            const ParResult r = alg == ParAlgorithm::Stationary ? par_stationary_mttkrp(problem, grid, {arith})
                                                               : par_general_mttkrp(problem, grid, {arith});
            const double err = max_relative_error(r.output, want);
            rows.push_back({to_string(alg) + "/" + to_string(arith), "grid=" + grid.to_string(), err,
                            kParallelTolerance, err <= kParallelTolerance});
        }
    }

    Output out(o.out);
    std::ostream& os = out.stream();
    os << "alg,detail,max_rel_err,tolerance,status,N,dims,R,n,source\n";
    bool all_ok = true;
    for (const Row& r : rows) {
        all_ok = all_ok && r.ok;
        os << r.alg << ',' << r.detail << ',' << fmt_double(r.err) << ',' << fmt_double(r.tol) << ','
           << (r.ok ? "pass" : "fail") << ',' << shape.order() << ',' << join_dims(shape.dims) << ',' << shape.rank
           << ',' << shape.mode + 1 << ',' << source_label(o) << '\n';
    }
    if (!all_ok) {
        throw VerificationFailure("at least one algorithm disagrees with the oracle");
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------

/// Splices `key=value` lines of a --config file in front of the command-line
/// arguments; every option takes its last value, so flags win.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    std::string path;
    std::size_t at = 0;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            at = i;
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            at = i;
            break;
        }
    }
    if (path.empty()) {
        return args;
    }
    std::ifstream in(path);
    if (!in) {
        throw InvalidInput("cannot open config file '" + path + "'");
    }
    const auto kv = read_config(in);
    auto given = [&](const std::string& flag) {
        return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
            return a == flag || a.rfind(flag + "=", 0) == 0;
        });
    };
    const bool cli_source = given("--synthetic") || given("--input");
    std::vector<std::string> injected;
    for (const auto& [key, value] : kv) {
        if (cli_source && (key == "synthetic" || key == "input")) {
            continue;
        }
        const std::string flag = key == "N" ? "-N" : "--" + key;
        if (key == "warm-start" || key == "verify" || key == "fig3") {
            if (value == "true" || value == "1" || value == "on" || value == "yes") {
                injected.push_back(flag);
            }
            continue;
        }
        injected.push_back(flag);
        injected.push_back(value);
    }
    // Drop the --config argument itself and insert after the subcommand.
    std::vector<std::string> out;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i == at) {
            if (args[i] == "--config") {
                ++i;
            }
            continue;
        }
        out.push_back(args[i]);
        if (i == 1) {
            out.insert(out.end(), injected.begin(), injected.end());
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    Options o;
    CLI::App app{"mttkrp_lab: communication simulators, lower bounds and planning for dense MTTKRP"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    std::string config_path;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--out", o.out, "Output path (default stdout)");
        sub->add_option("--config", config_path, "key=value file; command-line flags win");
    };
    auto source = [&](CLI::App* sub) {
        sub->add_option("--synthetic", o.synthetic, "Synthetic problem d1,...,dN:R[@seed]");
        sub->add_option("--input", o.input, "Tensor file, or synthetic:<spec>");
        sub->add_option("--mode", o.mode, "Output mode n (1-based)");
        sub->add_option("--seed", o.seed, "Seed for synthetic data without @seed");
    };
    auto shape = [&](CLI::App* sub) {
        sub->add_option("-N", o.order, "Tensor order");
        sub->add_option("--dims", o.dims, "Dimensions: 4,4,4 | 4x4x4 | 4^3");
        sub->add_option("--R", o.rank, "Rank");
    };

    CLI::App* seq = app.add_subcommand("seq", "Sequential unblocked/blocked algorithm on the two-level memory model");
    common(seq);
    source(seq);
    shape(seq);
    seq->add_option("--M", o.memory, "Fast memory words");
    seq->add_option("--b", o.block, "Block edge (default: largest feasible)");
    seq->add_option("--alg", o.alg, "blocked | unblocked");
    seq->add_flag("--warm-start", o.warm_start, "Credit up to M words resident at start and end");
    seq->add_flag("--verify", o.verify, "Compare with the oracle");

    CLI::App* par = app.add_subcommand("par", "Parallel stationary/general algorithm on a processor grid");
    common(par);
    source(par);
    par->add_option("--grid", o.grid, "P0xP1x...xPN");
    par->add_option("--P", o.procs, "Processor count (grid chosen automatically)");
    par->add_option("--alg", o.alg, "stationary | general");
    par->add_option("--arith", o.arith, "atomic | krp");
    par->add_flag("--verify", o.verify, "Compare with the oracle");

    CLI::App* bounds = app.add_subcommand("bounds", "Evaluate lower bounds");
    common(bounds);
    shape(bounds);
    bounds->add_option("--M", o.memory, "Fast/local memory words");
    bounds->add_option("--P", o.procs, "Processor count");
    bounds->add_option("--gamma", o.gamma, "Tensor balance constant (>= 1)");
    bounds->add_option("--delta", o.delta, "Matrix balance constant (>= 1)");

    CLI::App* sweep = app.add_subcommand("sweep", "Analytic strong-scaling sweep");
    common(sweep);
    shape(sweep);
    sweep->add_option("--P", o.procs, "Processor counts: 1,2,4 or 2^0..2^30");
    sweep->add_flag("--fig3", o.fig3, "I = 2^45, R = 2^15, N = 3, P = 2^0..2^30");
    sweep->add_option("--dat", o.dat, "Also write a whitespace-separated data file");
    sweep->add_option("--mm-model", o.mm_model, "recursive | regime");

    CLI::App* verify = app.add_subcommand("verify", "Check every algorithm against the oracle");
    common(verify);
    source(verify);
    verify->add_option("--M", o.memory, "Fast memory words for the sequential runs");
    verify->add_option("--b", o.block, "Block edge");
    verify->add_option("--P", o.procs, "Processor count for the parallel runs");

    try {
        std::vector<std::string> args = expand_config(argc, argv);
        std::reverse(args.begin(), args.end());
        args.pop_back();  // program name
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalid;
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    }

    try {
        if (seq->parsed()) {
            return cmd_seq(o);
        }
        if (par->parsed()) {
            return cmd_par(o);
        }
        if (bounds->parsed()) {
            return cmd_bounds(o);
        }
        if (sweep->parsed()) {
            return cmd_sweep(o);
        }
        return cmd_verify(o);
    } catch (const VerificationFailure& e) {
        std::cerr << "verification failed: " << e.what() << '\n';
        return kExitVerify;
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const Infeasible& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const Error& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}
