#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "chr/analysis.hpp"
#include "chr/chre.hpp"
#include "chr/chrmp.hpp"
#include "chr/chrt.hpp"
#include "chr/corpus.hpp"
#include "chr/engine_par.hpp"
#include "chr/engine_seq.hpp"
#include "chr/oracle.hpp"
#include "chr/parser.hpp"
#include "chr/trace_io.hpp"

namespace {

using namespace chr;

constexpr int kExitOk = 0;
constexpr int kExitDiagnostics = 1;
constexpr int kExitRuntime = 2;

std::string load_program_text(const std::string& spec) {
    if (spec.rfind("corpus:", 0) == 0) {
        std::string name = spec.substr(7);
        auto colon = name.find(':');
        if (name.rfind("philosophers", 0) == 0 && colon != std::string::npos)
            return corpus::philosophers_source(std::stoi(name.substr(colon + 1)));
        auto src = corpus::source(name);
        if (!src) {
            std::ostringstream os;
            os << "unknown corpus program '" << name << "'; available:";
            for (const auto& n : corpus::names())
                os << ' ' << n;
            throw std::invalid_argument(os.str());
        }
        return *src;
    }
    std::ifstream in(spec);
    if (!in)
        throw std::invalid_argument("cannot open program file " + spec);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Program load_program(const std::string& spec, bool print_diags, int& exit_code) {
    Program p = parse_program(load_program_text(spec));
    auto diags = validate_ground(p);
    if (!diags.empty() && print_diags)
        for (const auto& d : diags)
            std::cerr << d.str() << '\n';
    if (has_errors(diags))
        exit_code = kExitDiagnostics;
    return p;
}

GoalOrder parse_order(const std::string& s) {
    if (s == "stack")
        return GoalOrder::Stack;
    if (s == "queue")
        return GoalOrder::Queue;
    throw CLI::ValidationError("goal order must be stack or queue");
}

std::uint64_t env_seed(std::uint64_t cli_seed) {
    if (const char* s = std::getenv("CHR_SEED"))
        return std::stoull(s);
    return cli_seed;
}

struct RunArgs {
    std::string program;
    std::string goal;
    std::string engine = "seq";
    std::size_t workers = 4;
    std::string goal_order = "stack";
    std::vector<std::string> order_preds; // sym=stack
    bool no_rotation = false;
    std::string policy = "exhaustive";
    std::string schedule = "rr";
    std::string locations = "auto";
    std::string trace_path;
    bool stats = false;
    std::uint64_t fuel = kDefaultFuel;
    std::uint64_t seed = 0;
    int retries = 16;
    bool parallel_txns = false;
};

int do_run(const RunArgs& args) {
    int exit_code = kExitOk;
    Program p = load_program(args.program, true, exit_code);
    if (exit_code != kExitOk)
        return exit_code;

    EngineKind kind;
    if (args.engine == "seq")
        kind = EngineKind::Seq;
    else if (args.engine == "par")
        kind = EngineKind::Par;
    else if (args.engine == "mp")
        kind = EngineKind::Mp;
    else if (args.engine == "chrt")
        kind = EngineKind::Chrt;
    else if (args.engine == "chre")
        kind = EngineKind::Chre;
    else
        throw CLI::ValidationError("unknown engine " + args.engine);

    auto frag = check_fragment(p, kind);
    for (const auto& d : frag)
        std::cerr << d.str() << '\n';
    if (has_errors(frag))
        return kExitDiagnostics;

    std::uint64_t seed = env_seed(args.seed);
    std::string goal_text = corpus::expand_goal(args.goal, seed);
    std::vector<Constraint> goal =
        parse_goal(goal_text, p.dialect == Dialect::Chrt);

    std::vector<TraceEntry> trace;
    std::vector<Constraint> final_state;
    std::uint64_t steps = 0;
    std::string extra_stats;

    switch (kind) {
        case EngineKind::Seq: {
            SeqOptions opts;
            opts.order = parse_order(args.goal_order);
            opts.fuel = args.fuel;
            FinalResult r = run_seq(p, goal, opts);
            final_state = std::move(r.alive);
            trace = std::move(r.trace);
            steps = r.steps;
            break;
        }
        case EngineKind::Par: {
            if (args.workers == 0)
                throw CLI::ValidationError("--workers must be at least 1");
            ParConfig cfg;
            cfg.workers = args.workers;
            cfg.default_order = parse_order(args.goal_order);
            for (const auto& spec : args.order_preds) {
                auto eq = spec.find('=');
                if (eq == std::string::npos)
                    throw CLI::ValidationError("--order-pred expects sym=order");
                cfg.order_overrides[spec.substr(0, eq)] =
                    parse_order(spec.substr(eq + 1));
            }
            cfg.candidate_rotation = !args.no_rotation;
            cfg.fuel = args.fuel;
            FinalResult r = run_parallel(p, goal, cfg);
            final_state = std::move(r.alive);
            trace = std::move(r.trace);
            steps = r.steps;
            break;
        }
        case EngineKind::Mp: {
            mp::MpOptions opts;
            if (args.policy == "exhaustive") {
                opts.policy = mp::MpPolicy::Exhaustive;
            } else if (args.policy.rfind("random:", 0) == 0) {
                opts.policy = mp::MpPolicy::RandomSubset;
                opts.seed = std::stoull(args.policy.substr(7));
            } else {
                throw CLI::ValidationError(
                    "--policy must be exhaustive or random:<seed>");
            }
            mp::MpResult r = mp::run_mp(p, goal, opts);
            final_state.assign(r.final_state.begin(), r.final_state.end());
            steps = r.steps;
            extra_stats = std::string("acyclic=") + (r.all_acyclic ? "true" : "false");
            break;
        }
        case EngineKind::Chrt: {
            chrt::ChrtOptions opts;
            opts.max_retries = args.retries;
            opts.fuel = args.fuel;
            opts.parallel = args.parallel_txns;
            chrt::ChrtResult r = chrt::run_chrt(p, goal, opts);
            final_state = std::move(r.alive);
            steps = r.steps;
            for (std::size_t i = 0; i < r.transactions.size(); ++i) {
                const char* status = "pending";
                switch (r.transactions[i].status) {
                    case chrt::TxnStatus::Committed: status = "committed"; break;
                    case chrt::TxnStatus::RolledBack: status = "rolled-back"; break;
                    case chrt::TxnStatus::Stuck: status = "stuck"; break;
                    case chrt::TxnStatus::Pending: break;
                }
                std::cout << "txn " << i << ": " << status << '\n';
            }
            break;
        }
        case EngineKind::Chre: {
            chre::ChreOptions opts;
            if (args.schedule == "rr")
                opts.schedule = chre::Schedule::RoundRobin;
            else if (args.schedule.rfind("rand:", 0) == 0) {
                opts.schedule = chre::Schedule::Random;
                opts.seed = std::stoull(args.schedule.substr(5));
            } else if (args.schedule == "par")
                opts.schedule = chre::Schedule::Parallel;
            else
                throw CLI::ValidationError(
                    "--schedule must be rr, rand:<seed> or par");
            opts.fuel = args.fuel;
            std::vector<Term> extra;
            if (args.locations != "auto") {
                std::stringstream ss(args.locations);
                std::string item;
                while (std::getline(ss, item, ','))
                    extra.push_back(parse_term(item));
            }
            chre::ChreResult r = chre::run_ensemble(p, goal, opts, extra);
            std::cout << r.str();
            if (args.stats)
                std::cout << "steps=" << r.steps
                          << " quiescent=" << (r.quiescent ? "true" : "false")
                          << " sent=" << r.sent << '\n';
            return kExitOk;
        }
    }

    std::cout << format_multiset(final_state);
    if (args.stats) {
        std::cout << "steps=" << steps << '\n';
        if (!extra_stats.empty())
            std::cout << extra_stats << '\n';
    }
    if (!args.trace_path.empty()) {
        std::ofstream out(args.trace_path);
        write_trace_file(out, trace, final_state);
    }
    return kExitOk;
}

struct CheckArgs {
    std::string program;
    std::string engine;
    bool confluence = false;
    int domain = 3;
    std::size_t depth = 10'000;
    bool erasable = false;
};

int do_check(const CheckArgs& args) {
    int exit_code = kExitOk;
    Program p = load_program(args.program, true, exit_code);
    if (exit_code != kExitOk)
        return exit_code;

    if (!args.engine.empty()) {
        EngineKind kind = args.engine == "par"    ? EngineKind::Par
                          : args.engine == "mp"   ? EngineKind::Mp
                          : args.engine == "chrt" ? EngineKind::Chrt
                          : args.engine == "chre" ? EngineKind::Chre
                                                  : EngineKind::Seq;
        auto diags = check_fragment(p, kind);
        for (const auto& d : diags)
            std::cout << d.str() << '\n';
        if (kind == EngineKind::Chre)
            for (const auto& info : neighbor_summary(p))
                if (info.primary)
                    std::cout << "rule " << info.rule << ": primary "
                              << *info.primary << ", n=" << info.n << '\n';
        if (has_errors(diags))
            exit_code = kExitDiagnostics;
    }

    std::vector<Term> domain;
    for (int i = 0; i < args.domain; ++i)
        domain.push_back(Term::integer(i));

    if (args.confluence) {
        auto pairs = oracle::critical_pairs(p, domain);
        std::size_t non_joinable = 0;
        for (const auto& cp : pairs) {
            if (oracle::joinable(p, cp, args.depth) == oracle::Joinability::No) {
                ++non_joinable;
                std::cout << "non-joinable: rules " << cp.rule1 << "/"
                          << cp.rule2 << " state {";
                for (std::size_t i = 0; i < cp.overlap_state.size(); ++i) {
                    if (i)
                        std::cout << ", ";
                    std::cout << cp.overlap_state[i].str();
                }
                std::cout << "}\n";
            }
        }
        std::cout << "critical pairs: " << pairs.size()
                  << ", non-joinable: " << non_joinable << '\n';
        if (non_joinable > 0)
            exit_code = kExitDiagnostics;
    }
    if (args.erasable) {
        bool ok = chrt::wrappers_erasable(p, domain, args.depth);
        std::cout << (ok ? "wrappers erasable\n" : "wrappers not erasable\n");
    }
    return exit_code;
}

struct BenchArgs {
    std::string program;
    std::string goal;
    std::vector<std::size_t> workers{1, 2, 4, 8};
    std::vector<std::string> goal_orders{"stack"};
    std::uint64_t seed = 0;
    std::uint64_t fuel = kDefaultFuel;
};

int do_bench(const BenchArgs& args) {
    int exit_code = kExitOk;
    Program p = load_program(args.program, true, exit_code);
    if (exit_code != kExitOk)
        return exit_code;
    for (std::size_t w : args.workers)
        if (w == 0)
            throw CLI::ValidationError("--workers entries must be at least 1");

    std::uint64_t seed = env_seed(args.seed);
    std::vector<Constraint> goal =
        parse_goal(corpus::expand_goal(args.goal, seed));
    std::cout << "engine,workers,goal_order,wall_ms,result_hash\n";
    for (const auto& order : args.goal_orders) {
        for (std::size_t w : args.workers) {
            ParConfig cfg;
            cfg.workers = w;
            cfg.default_order = parse_order(order);
            cfg.fuel = args.fuel;
            cfg.record_trace = false;
            auto start = std::chrono::steady_clock::now();
            FinalResult r = run_parallel(p, goal, cfg);
            auto ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
            std::cout << "par," << w << ',' << order << ',' << ms << ','
                      << result_hash(r.alive) << '\n';
        }
    }
    return kExitOk;
}

int do_encode(const std::string& program) {
    int exit_code = kExitOk;
    Program p = load_program(program, true, exit_code);
    if (exit_code != kExitOk)
        return exit_code;
    chre::EncodedProgram enc = chre::encode_program(p);
    std::cout << enc.program.str();
    if (!enc.protocol_symbols.empty()) {
        std::cout << "% protocol constraints:";
        for (const auto& s : enc.protocol_symbols)
            std::cout << ' ' << s;
        std::cout << '\n';
    }
    return kExitOk;
}

struct ReplayArgs {
    std::string program;
    std::string goal;
    std::string trace_path;
    std::uint64_t seed = 0;
};

int do_replay(const ReplayArgs& args) {
    int exit_code = kExitOk;
    Program p = load_program(args.program, true, exit_code);
    if (exit_code != kExitOk)
        return exit_code;
    std::ifstream in(args.trace_path);
    if (!in)
        throw std::invalid_argument("cannot open trace file " + args.trace_path);
    TraceFile tf = read_trace_file(in);
    std::vector<Constraint> goal =
        parse_goal(corpus::expand_goal(args.goal, env_seed(args.seed)));
    std::vector<Constraint> users;
    for (const auto& c : goal)
        if (!c.is_builtin())
            users.push_back(c);
    bool ok = oracle::check_serializable(p, oracle::make_multiset(users),
                                         tf.trace, tf.final_state);
    std::cout << (ok ? "serializable\n" : "NOT serializable\n");
    return ok ? kExitOk : kExitDiagnostics;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ground CHR runtime and analysis toolkit"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "execute a program on a goal");
    run->add_option("program", run_args.program,
                    "corpus:<name> or a .chr file")->required();
    run->add_option("--goal", run_args.goal, "goal text or gen:<kind>:<args>")
        ->required();
    run->add_option("--engine", run_args.engine, "seq|par|mp|chrt|chre");
    run->add_option("--workers", run_args.workers, "parallel worker count");
    run->add_option("--goal-order", run_args.goal_order, "stack|queue");
    run->add_option("--order-pred", run_args.order_preds,
                    "per-predicate goal order, sym=stack|queue");
    run->add_flag("--no-rotation", run_args.no_rotation,
                  "disable per-worker candidate rotation");
    run->add_option("--policy", run_args.policy,
                    "mp policy: exhaustive|random:<seed>");
    run->add_option("--schedule", run_args.schedule,
                    "chre schedule: rr|rand:<seed>|par");
    run->add_option("--locations", run_args.locations,
                    "chre location set: auto or comma-separated constants");
    run->add_option("--trace", run_args.trace_path, "write the delta trace here");
    run->add_flag("--stats", run_args.stats, "print step counts");
    run->add_option("--fuel", run_args.fuel, "transition budget");
    run->add_option("--seed", run_args.seed, "generator seed (CHR_SEED overrides)");
    run->add_option("--retries", run_args.retries, "chrt commit retry bound");
    run->add_flag("--parallel-txns", run_args.parallel_txns,
                  "run chrt transactions on separate threads");

    CheckArgs check_args;
    auto* check = app.add_subcommand("check", "validate and analyse a program");
    check->add_option("program", check_args.program)->required();
    check->add_option("--engine", check_args.engine,
                      "fragment check for seq|par|mp|chrt|chre");
    check->add_flag("--confluence", check_args.confluence,
                    "bounded critical-pair analysis");
    check->add_option("--domain", check_args.domain,
                      "ground domain size for the analysis");
    check->add_option("--depth", check_args.depth, "joinability state budget");
    check->add_flag("--erasable", check_args.erasable,
                    "chrt wrapper-erasure lint");

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "parallel benchmark table");
    bench->add_option("program", bench_args.program)->required();
    bench->add_option("--goal", bench_args.goal)->required();
    bench->add_option("--workers", bench_args.workers, "worker counts")
        ->delimiter(',');
    bench->add_option("--goal-order", bench_args.goal_orders, "stack and/or queue")
        ->delimiter(',');
    bench->add_option("--seed", bench_args.seed);
    bench->add_option("--fuel", bench_args.fuel);

    std::string encode_program_spec;
    auto* encode = app.add_subcommand("encode", "emit the 0-neighbor encoding");
    encode->add_option("program", encode_program_spec)->required();

    ReplayArgs replay_args;
    auto* replay = app.add_subcommand("replay", "oracle-check a trace file");
    replay->add_option("program", replay_args.program)->required();
    replay->add_option("--goal", replay_args.goal)->required();
    replay->add_option("--trace", replay_args.trace_path)->required();
    replay->add_option("--seed", replay_args.seed);

    try {
        app.parse(argc, argv);
        if (run->parsed())
            return do_run(run_args);
        if (check->parsed())
            return do_check(check_args);
        if (bench->parsed())
            return do_bench(bench_args);
        if (encode->parsed())
            return do_encode(encode_program_spec);
        if (replay->parsed())
            return do_replay(replay_args);
        return kExitDiagnostics;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitDiagnostics;
    } catch (const ParseError& e) {
        std::cerr << e.what() << '\n';
        return kExitDiagnostics;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDiagnostics;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
