#include "mw/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "mw/codec.hpp"
#include "mw/mbt/specs.hpp"
#include "mw/monitor.hpp"

namespace mw::cli {

namespace {

using codec::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fully resolved settings: defaults, then the config file, then flags.
struct Settings {
  std::string backend = "transparent";
  unsigned bits = 4;
  std::uint64_t seed = 42;
  sim::SimConfig sim;
  std::size_t budget = 1'000'000;
  unsigned jobs = 1;
};

// Flags as typed; unset options leave the settings alone.
struct Flags {
  std::string config;
  std::string backend;
  unsigned bits = 0;
  std::uint64_t seed = 0;
  std::size_t nodes = 0, steps = 0, txs = 0, budget = 0;
  unsigned jobs = 0;
  std::string topology;
  double loss = 0, dup = 0, conflicts = 0;
  bool no_bootstrap = false;
  /// Registered options by long name, to tell set flags from defaults.
  std::map<std::string, const CLI::Option*> options;

  CLI::Option* reg(CLI::Option* o) {
    options[o->get_name()] = o;
    return o;
  }
  bool given(const std::string& name) const {
    auto it = options.find(name);
    return it != options.end() && it->second->count() > 0;
  }
};

struct Io {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

std::string slurp(const std::string& path, std::istream& in) {
  std::ostringstream s;
  if (path == "-") {
    s << in.rdbuf();
    return s.str();
  }
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read " + path);
  s << f.rdbuf();
  return s.str();
}

json read_json(const std::string& path, std::istream& in) { return codec::parse(slurp(path, in)); }

void write(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

json verdict_json(const Verdict& v) {
  json j{{"valid", v.ok()}, {"reason", reason_name(v.reason)}};
  if (v.index) j["index"] = *v.index;
  if (v.block) j["block"] = *v.block;
  if (!v.detail.empty()) j["detail"] = v.detail;
  return j;
}

int report(const Verdict& v, std::ostream& out) {
  write(out, verdict_json(v));
  return v.ok() ? kOk : kInvalid;
}

std::uint64_t get_uint(const json& j, const std::string& key) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    throw sim::ConfigError(key + " must be a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

Settings resolve(const Flags& f, std::istream& in) {
  Settings s;
  if (!f.config.empty()) {
    auto j = read_json(f.config, in);
    if (!j.is_object()) throw sim::ConfigError("config must be a JSON object");
    for (const auto& [k, v] : j.items()) {
      if (k == "backend") {
        if (!v.is_string()) throw sim::ConfigError("backend must be a string");
        s.backend = v.get<std::string>();
      } else if (k == "bits") {
        s.bits = static_cast<unsigned>(get_uint(v, k));
      } else if (k == "seed") {
        s.seed = get_uint(v, k);
      } else if (k == "sim") {
        for (const char* global : {"backend", "bits", "seed"}) {
          if (v.is_object() && v.contains(global)) {
            throw sim::ConfigError(std::string(global) + " belongs at the top level of the config");
          }
        }
        s.sim = sim::config_from_json(v);
      } else if (k == "mbt") {
        if (!v.is_object()) throw sim::ConfigError("mbt must be an object");
        for (const auto& [mk, mv] : v.items()) {
          if (mk == "budget") {
            s.budget = get_uint(mv, mk);
          } else if (mk == "jobs") {
            s.jobs = static_cast<unsigned>(get_uint(mv, mk));
          } else {
            throw sim::ConfigError("unknown mbt field " + mk);
          }
        }
      } else {
        throw sim::ConfigError("unknown config field " + k);
      }
    }
  }
  auto given = [&](const char* name) { return f.given(name); };
  if (given("--backend")) s.backend = f.backend;
  if (given("--bits")) s.bits = f.bits;
  if (given("--seed")) s.seed = f.seed;
  if (given("--nodes")) s.sim.nodes = f.nodes;
  if (given("--topology")) s.sim.topology = f.topology;
  if (given("--steps")) s.sim.steps = f.steps;
  if (given("--loss")) s.sim.loss = f.loss;
  if (given("--dup")) s.sim.dup = f.dup;
  if (given("--txs")) s.sim.txs = f.txs;
  if (given("--conflicts")) s.sim.conflicts = f.conflicts;
  if (given("--no-bootstrap")) s.sim.bootstrap = false;
  if (given("--budget")) s.budget = f.budget;
  if (given("--jobs")) s.jobs = f.jobs;

  auto grp = group::make_backend(s.backend);
  if (s.bits < 1 || s.bits > crypto::max_range_bits(*grp)) {
    throw sim::ConfigError("bits must lie in [1, " + std::to_string(crypto::max_range_bits(*grp)) + "] for " +
                           s.backend);
  }
  s.sim.backend = s.backend;
  s.sim.bits = s.bits;
  s.sim.seed = s.seed;
  s.sim.validate();
  if (s.budget == 0) throw sim::ConfigError("budget must be positive");
  if (s.jobs < 1 || s.jobs > 256) throw sim::ConfigError("jobs must lie in [1, 256]");
  return s;
}

tx::Params params_of(const Settings& s) { return tx::Params::with(group::make_backend(s.backend), s.bits); }

// Openings in a request file: [{"value": v, "blinding": r}], blinding optional.
std::vector<tx::Opening> openings(const json& j, const group::Backend& grp, std::mt19937_64& rng) {
  if (!j.is_array()) throw DecodeError("expected an array of openings");
  std::vector<tx::Opening> out;
  for (const auto& o : j) {
    if (!o.is_object() || !o.contains("value")) throw DecodeError("opening needs a value");
    for (const auto& [k, v] : o.items()) {
      if (k != "value" && k != "blinding") throw DecodeError("unknown opening field " + k);
    }
    auto value = get_uint(o["value"], "value");
    auto blinding = o.contains("blinding") ? get_uint(o["blinding"], "blinding") : 1 + rng() % (grp.order() - 1);
    out.push_back({grp.scalar(blinding), grp.scalar(value)});
  }
  return out;
}

// ---- handlers -----------------------------------------------------------------

int tx_build(const Settings& s, const std::string& file, Io io) {
  auto params = params_of(s);
  std::mt19937_64 rng(s.seed);
  auto req = read_json(file, io.in);
  if (!req.is_object()) throw DecodeError("build request must be an object");
  auto ins = openings(req.value("inputs", json::array()), params.grp(), rng);
  auto outs = openings(req.value("outputs", json::array()), params.grp(), rng);
  tx::Transaction t;
  try {
    t = tx::build_transaction(params, ins, outs);
  } catch (const tx::BuildError& e) {
    throw UsageError(e.what());
  } catch (const crypto::RangeViolation& e) {
    throw UsageError(e.what());
  }
  write(io.out, codec::to_json(t, params.grp()));
  return kOk;
}

int tx_validate(const Settings& s, const std::string& file, Io io) {
  auto params = params_of(s);
  auto t = codec::transaction_from_json(read_json(file, io.in), params.grp());
  return report(tx::validate_transaction(t, params), io.out);
}

int block_aggregate(const Settings& s, const std::vector<std::string>& files, Io io) {
  auto params = params_of(s);
  std::vector<tx::Transaction> txs;
  for (const auto& f : files) txs.push_back(codec::transaction_from_json(read_json(f, io.in), params.grp()));
  try {
    write(io.out, codec::to_json(ledger::aggregate(txs, params.grp().scalar(0), params), params.grp()));
  } catch (const ledger::ConflictError& e) {
    io.err << "conflict: " << e.what() << '\n';
    return kInvalid;
  } catch (const ledger::AggregateError& e) {
    io.err << "cannot aggregate: " << e.what() << '\n';
    return kInvalid;
  }
  return kOk;
}

int block_cutthrough(const Settings& s, const std::string& file, Io io) {
  auto params = params_of(s);
  auto b = codec::block_from_json(read_json(file, io.in), params.grp());
  write(io.out, codec::to_json(ledger::cut_through(b), params.grp()));
  return kOk;
}

int block_validate(const Settings& s, const std::string& file, Io io) {
  auto params = params_of(s);
  auto b = codec::block_from_json(read_json(file, io.in), params.grp());
  return report(ledger::validate_block(b, params), io.out);
}

int chain_genesis(const Settings& s, const std::string& file, Io io) {
  auto params = params_of(s);
  std::mt19937_64 rng(s.seed);
  auto req = read_json(file, io.in);
  if (!req.is_object()) throw DecodeError("genesis request must be an object");
  auto outs = openings(req.value("outputs", json::array()), params.grp(), rng);
  ledger::Chain c;
  try {
    c.blocks.push_back(ledger::make_genesis(params, outs));
  } catch (const crypto::RangeViolation& e) {
    throw UsageError(e.what());
  }
  write(io.out, codec::to_json(c, params.grp()));
  return kOk;
}

int chain_validate(const Settings& s, const std::string& file, Io io) {
  auto params = params_of(s);
  auto c = codec::chain_from_json(read_json(file, io.in), params.grp());
  return report(ledger::valid_chain(c, params), io.out);
}

int chain_utxo(const Settings& s, const std::string& file, Io io) {
  auto params = params_of(s);
  auto c = codec::chain_from_json(read_json(file, io.in), params.grp());
  try {
    json out = json::array();
    for (const auto& cm : ledger::utxo(c).commitments()) out.push_back(cm.hex());
    write(io.out, out);
  } catch (const ledger::InconsistencyError& e) {
    io.err << "inconsistent chain: " << e.what() << '\n';
    return kInvalid;
  }
  return kOk;
}

int sim_run(const Settings& s, const std::string& out_file, Io io) {
  std::ofstream file;
  std::ostream* trace = &io.out;
  if (!out_file.empty() && out_file != "-") {
    file.open(out_file);
    if (!file) throw UsageError("cannot write " + out_file);
    trace = &file;
  }
  auto summary = sim::run(s.sim, *trace);
  json tips = json::object();
  for (const auto& [a, h] : summary.tips) tips[a] = h;
  io.err << json{{"steps", summary.steps}, {"quiescent", summary.quiescent}, {"tips", tips}}.dump() << '\n';
  return kOk;
}

std::vector<mbt::Tactic> parse_schedule(const std::string& transition, const std::string& labels) {
  if (labels.empty()) return mbt::default_schedule(transition);
  std::vector<mbt::Tactic> out;
  std::stringstream ss(labels);
  for (std::string l; std::getline(ss, l, ',');) {
    if (!l.empty()) out.push_back(mbt::Tactic::parse(l));
  }
  return out;
}

int mbt_gen(const Settings& s, const std::string& transition, const std::string& tactics, Io io) {
  auto spec = mbt::spec_for(transition);
  try {
    write(io.out, to_json(mbt::make_suite(spec, parse_schedule(transition, tactics), s.budget, s.jobs)));
  } catch (const mbt::BudgetExceeded& e) {
    io.err << "budget exceeded: " << e.what() << '\n';
    return kInvalid;
  } catch (const mbt::TacticMismatch& e) {
    throw UsageError(e.what());
  }
  return kOk;
}

int mbt_run(const std::string& file, const std::string& sut_name, Io io) {
  auto j = read_json(file, io.in);
  if (!j.is_object() || !j.contains("transition") || !j["transition"].is_string()) {
    throw DecodeError("suite lacks a transition");
  }
  auto spec = mbt::spec_for(j["transition"].get<std::string>());
  auto suite = mbt::suite_from_json(j, spec);
  auto sut = mbt::make_adapter(spec.name, sut_name);
  auto r = mbt::run_suite(spec, suite.cases, *sut);
  write(io.out, to_json(r));
  return r.failed() == 0 ? kOk : kInvalid;
}

int monitor_run(const std::string& file, Io io) {
  std::istringstream trace(slurp(file, io.in));
  auto summary = monitor::run_monitor(trace, [&](const monitor::Alarm& a) { io.out << to_json(a).dump() << '\n'; });
  io.err << to_json(summary).dump() << '\n';
  return summary.divergence_alarms == 0 ? kOk : kInvalid;
}

int monitor_inject(const std::string& file, const std::string& fault, std::uint64_t min_step, Io io) {
  auto f = monitor::fault_from_name(fault);
  if (!f) throw UsageError("unknown fault " + fault);
  std::vector<json> lines;
  std::istringstream in(slurp(file, io.in));
  for (std::string l; std::getline(in, l);) {
    if (!l.empty()) lines.push_back(codec::parse(l));
  }
  auto inj = monitor::inject_fault(lines, *f, min_step);
  for (const auto& l : inj.lines) io.out << l.dump() << '\n';
  io.err << json{{"fault", fault}, {"step", inj.step}}.dump() << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"MimbleWimble reference model", "mw"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--config", f.config, "JSON config file");
  f.reg(app.add_option("--backend", f.backend, "Group backend"))->check(CLI::IsMember({"transparent", "toycurve"}));
  f.reg(app.add_option("--bits", f.bits, "Range proof width n"));
  f.reg(app.add_option("--seed", f.seed, "Seed of every random choice"));

  std::string file, out_file, transition, tactics, sut = "model", fault;
  std::vector<std::string> files;
  std::uint64_t min_step = 1;
  std::function<int(const Settings&)> action;
  auto file_arg = [&](CLI::App* c) { c->add_option("file", file, "Input file, - for stdin")->required(); };

  auto* txc = app.add_subcommand("tx", "Transactions")->require_subcommand(1);
  auto* tx_b = txc->add_subcommand("build", "Build a transaction from a request of openings");
  file_arg(tx_b);
  tx_b->callback([&] { action = [&](const Settings& s) { return tx_build(s, file, {in, out, err}); }; });
  auto* tx_v = txc->add_subcommand("validate", "Validate a transaction");
  file_arg(tx_v);
  tx_v->callback([&] { action = [&](const Settings& s) { return tx_validate(s, file, {in, out, err}); }; });

  auto* blk = app.add_subcommand("block", "Blocks")->require_subcommand(1);
  auto* blk_a = blk->add_subcommand("aggregate", "Aggregate transactions into a block");
  blk_a->add_option("files", files, "Transaction files")->required();
  blk_a->callback([&] { action = [&](const Settings& s) { return block_aggregate(s, files, {in, out, err}); }; });
  auto* blk_c = blk->add_subcommand("cutthrough", "Apply cut-through to a block");
  file_arg(blk_c);
  blk_c->callback([&] { action = [&](const Settings& s) { return block_cutthrough(s, file, {in, out, err}); }; });
  auto* blk_v = blk->add_subcommand("validate", "Validate a block");
  file_arg(blk_v);
  blk_v->callback([&] { action = [&](const Settings& s) { return block_validate(s, file, {in, out, err}); }; });

  auto* ch = app.add_subcommand("chain", "Chains")->require_subcommand(1);
  auto* ch_g = ch->add_subcommand("genesis", "Build a genesis-only chain from a request of openings");
  file_arg(ch_g);
  ch_g->callback([&] { action = [&](const Settings& s) { return chain_genesis(s, file, {in, out, err}); }; });
  auto* ch_v = ch->add_subcommand("validate", "Validate a chain");
  file_arg(ch_v);
  ch_v->callback([&] { action = [&](const Settings& s) { return chain_validate(s, file, {in, out, err}); }; });
  auto* ch_u = ch->add_subcommand("utxo", "Print the unspent outputs of a chain");
  file_arg(ch_u);
  ch_u->callback([&] { action = [&](const Settings& s) { return chain_utxo(s, file, {in, out, err}); }; });

  auto* sm = app.add_subcommand("sim", "Network simulation")->require_subcommand(1);
  auto* sm_r = sm->add_subcommand("run", "Run the simulator and write a JSON Lines trace");
  f.reg(sm_r->add_option("--nodes", f.nodes));
  f.reg(sm_r->add_option("--topology", f.topology))->check(CLI::IsMember({"full", "ring", "line", "star"}));
  f.reg(sm_r->add_option("--steps", f.steps));
  f.reg(sm_r->add_option("--loss", f.loss));
  f.reg(sm_r->add_option("--dup", f.dup));
  f.reg(sm_r->add_option("--txs", f.txs));
  f.reg(sm_r->add_option("--conflicts", f.conflicts));
  f.reg(sm_r->add_flag("--no-bootstrap", f.no_bootstrap));
  sm_r->add_option("--out", out_file, "Trace file (default stdout)");
  sm_r->callback([&] { action = [&](const Settings& s) { return sim_run(s, out_file, {in, out, err}); }; });

  auto* mb = app.add_subcommand("mbt", "Model-based testing")->require_subcommand(1);
  auto* mb_g = mb->add_subcommand("gen", "Generate an abstract test suite");
  mb_g->add_option("--transition", transition)->required()->check(CLI::IsMember(mbt::transitions()));
  mb_g->add_option("--tactics", tactics, "Comma-separated tactic labels");
  f.reg(mb_g->add_option("--budget", f.budget));
  f.reg(mb_g->add_option("--jobs", f.jobs));
  mb_g->callback([&] { action = [&](const Settings& s) { return mbt_gen(s, transition, tactics, {in, out, err}); }; });
  auto* mb_r = mb->add_subcommand("run", "Run a suite against a SUT");
  file_arg(mb_r);
  mb_r->add_option("--sut", sut, "model or a mutant name");
  mb_r->callback([&] { action = [&](const Settings&) { return mbt_run(file, sut, {in, out, err}); }; });

  auto* mo = app.add_subcommand("monitor", "Trace monitoring")->require_subcommand(1);
  auto* mo_r = mo->add_subcommand("run", "Monitor a trace; alarms go to stdout");
  file_arg(mo_r);
  mo_r->callback([&] { action = [&](const Settings&) { return monitor_run(file, {in, out, err}); }; });
  auto* mo_i = mo->add_subcommand("inject", "Insert one faulty event into a trace");
  file_arg(mo_i);
  mo_i->add_option("--fault", fault)->required();
  mo_i->add_option("--min-step", min_step);
  mo_i->callback([&] { action = [&](const Settings&) { return monitor_inject(file, fault, min_step, {in, out, err}); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n' << app.help();
    return kUsage;
  }

  try {
    auto settings = resolve(f, in);
    return action(settings);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const DecodeError& e) {
    err << "malformed input: " << e.what() << '\n';
  } catch (const json::exception& e) {
    err << "malformed input: " << e.what() << '\n';
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
  }
  return kUsage;
}

}  // namespace mw::cli
