#include "sketchattn/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "sketchattn/errors.hpp"
#include "sketchattn/io.hpp"
#include "sketchattn/kernels.hpp"
#include "sketchattn/rng.hpp"
#include "sketchattn/sketch.hpp"

namespace sketchattn {

namespace {

const char* const kUsage = R"(usage: sketchattn <command> [flags]

commands:
  bench-spectral     relative spectral error of low-rank methods over a d grid
  bench-runtime      wall time and analytic peak memory across sequence lengths
  loewner-audit      one-sided ordering check of the lifted approximation
  spectrum           top singular values of the kernel target, largest-normalized
  sensitivity        output perturbation sensitivity vs exact softmax attention
  check-invariants   fast property suites; exits 3 if any fails

flags:
  --n LIST           sequence length(s); bench-runtime takes a comma list (default 256)
  --p N              query/key width (default 8)
  --pv N             value width (default: same as --p)
  --d LIST           landmark budget(s); comma list where the command sweeps
  --seeds SPEC       lone integer = that many seeds counting from 0; comma list = explicit
  --kernel NAME      sm | gaussian (default gaussian)
  --method LIST      bench-spectral: exact,skyformer_lifted,naive_nystrom,truncated_svd
                     bench-runtime/sensitivity: softmax_exact,kernelized_exact,skyformer
  --dist NAME        iso | aniso (default iso)
  --sigma X          input scale (default 1)
  --decay X          per-column variance decay for aniso (default 0.5)
  --gamma X          ridge for the iterative inverse (default 1e-3)
  --inverse NAME     pinv | iter (default pinv)
  --iters N          iteration cap for the iterative inverse (default 20)
  --tol X            residual tolerance for the iterative inverse (default 1e-7)
  --repeats N        timing repetitions per cell, median reported (default 5)
  --trials N         perturbation directions per instance (default 4)
  --perturb-scale X  relative perturbation size (default 1e-3)
  --topk N           singular values reported by spectrum (default 32)
  --replacement W    with | without (default with)
  --q/--k/--v PATH   load Q/K/V from matrix files instead of generating
  --out PATH         write CSV here instead of stdout
  --config PATH      read `key = value` defaults (same keys as flags, without --)

environment:
  SKETCHATTN_THREADS  caps worker threads (0 or unset = all cores)

exit codes: 0 ok, 1 usage error, 2 runtime/validation failure, 3 invariant failure
)";

std::string trim(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_commas(const std::string& what, const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    const std::size_t stop = comma == std::string::npos ? s.size() : comma;
    const std::string tok = trim(s.substr(start, stop - start));
    if (!tok.empty()) out.push_back(tok);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw UsageError(what + " is empty");
  return out;
}

std::uint64_t parse_u64(const std::string& what, const std::string& tok) {
  if (!tok.empty() && tok.find_first_not_of("0123456789") == std::string::npos) {
    try {
      std::size_t pos = 0;
      const unsigned long long v = std::stoull(tok, &pos);
      if (pos == tok.size()) return v;
    } catch (const std::exception&) {
    }
  }
  throw UsageError(what + " expects a non-negative integer, got '" + tok + "'");
}

std::size_t parse_size(const std::string& what, const std::string& tok, std::size_t min_value) {
  const std::uint64_t v = parse_u64(what, tok);
  if (v < min_value) {
    throw UsageError(what + " must be at least " + std::to_string(min_value) + ", got '" + tok +
                     "'");
  }
  return static_cast<std::size_t>(v);
}

double parse_real(const std::string& what, const std::string& tok, bool require_positive) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (tok.empty() || end != tok.c_str() + tok.size() || !std::isfinite(v)) {
    throw UsageError(what + " expects a finite number, got '" + tok + "'");
  }
  if (require_positive && !(v > 0.0)) {
    throw UsageError(what + " must be positive, got '" + tok + "'");
  }
  return v;
}

std::vector<std::size_t> parse_size_list(const std::string& what, const std::string& tok,
                                         std::size_t min_value) {
  std::vector<std::size_t> out;
  for (const std::string& piece : split_commas(what, tok)) {
    out.push_back(parse_size(what, piece, min_value));
  }
  return out;
}

std::vector<std::uint64_t> parse_seed_spec(const std::string& what, const std::string& tok) {
  if (tok.find(',') == std::string::npos) {
    const std::uint64_t count = parse_u64(what, tok);
    if (count == 0) throw UsageError(what + " needs at least one seed");
    std::vector<std::uint64_t> seeds(count);
    for (std::uint64_t i = 0; i < count; ++i) seeds[i] = i;
    return seeds;
  }
  std::vector<std::uint64_t> seeds;
  for (const std::string& piece : split_commas(what, tok)) {
    seeds.push_back(parse_u64(what, piece));
  }
  return seeds;
}

Method parse_method(const std::string& name) {
  if (name == "exact") return Method::Exact;
  if (name == "skyformer_lifted") return Method::SkyformerLifted;
  if (name == "naive_nystrom") return Method::NaiveNystrom;
  if (name == "truncated_svd") return Method::TruncatedSVD;
  throw UsageError("unknown method '" + name +
                   "' (expected exact, skyformer_lifted, naive_nystrom or truncated_svd)");
}

AttentionKindId parse_kind(const std::string& name) {
  if (name == "softmax_exact") return AttentionKindId::SoftmaxExact;
  if (name == "kernelized_exact") return AttentionKindId::KernelizedExact;
  if (name == "skyformer") return AttentionKindId::Skyformer;
  throw UsageError("unknown method '" + name +
                   "' (expected softmax_exact, kernelized_exact or skyformer)");
}

void assign(RunConfig& cfg, const std::string& key, const std::string& value,
            const std::string& what) {
  if (key == "n") {
    cfg.ns = parse_size_list(what, value, 1);
  } else if (key == "p") {
    cfg.p = parse_size(what, value, 1);
  } else if (key == "pv") {
    cfg.p_v = parse_size(what, value, 1);
  } else if (key == "d") {
    cfg.ds = parse_size_list(what, value, 1);
  } else if (key == "seeds") {
    cfg.seeds = parse_seed_spec(what, value);
  } else if (key == "kernel") {
    if (value == "sm") {
      cfg.kernel = KernelKind::SoftmaxSM;
    } else if (value == "gaussian") {
      cfg.kernel = KernelKind::Gaussian;
    } else {
      throw UsageError(what + " expects sm or gaussian, got '" + value + "'");
    }
  } else if (key == "method") {
    cfg.methods = split_commas(what, value);
  } else if (key == "dist") {
    if (value == "iso") {
      cfg.distribution = Distribution::IsotropicGaussian;
    } else if (value == "aniso") {
      cfg.distribution = Distribution::AnisotropicGaussian;
    } else {
      throw UsageError(what + " expects iso or aniso, got '" + value + "'");
    }
  } else if (key == "sigma") {
    cfg.sigma = parse_real(what, value, true);
  } else if (key == "decay") {
    cfg.decay = parse_real(what, value, true);
  } else if (key == "gamma") {
    cfg.gamma = parse_real(what, value, true);
  } else if (key == "inverse") {
    if (value == "pinv") {
      cfg.inverse_mode = InverseMode::ExactPinv;
    } else if (value == "iter") {
      cfg.inverse_mode = InverseMode::Iterative;
    } else {
      throw UsageError(what + " expects pinv or iter, got '" + value + "'");
    }
  } else if (key == "iters") {
    cfg.iters = parse_size(what, value, 1);
  } else if (key == "tol") {
    cfg.tol = parse_real(what, value, true);
  } else if (key == "repeats") {
    cfg.repeats = parse_size(what, value, 1);
  } else if (key == "trials") {
    cfg.trials = parse_size(what, value, 1);
  } else if (key == "perturb-scale") {
    cfg.perturb_scale = parse_real(what, value, true);
  } else if (key == "topk") {
    cfg.top_k = parse_size(what, value, 1);
  } else if (key == "replacement") {
    if (value == "with") {
      cfg.with_replacement = true;
    } else if (value == "without") {
      cfg.with_replacement = false;
    } else {
      throw UsageError(what + " expects with or without, got '" + value + "'");
    }
  } else if (key == "q") {
    cfg.q_path = value;
  } else if (key == "k") {
    cfg.k_path = value;
  } else if (key == "v") {
    cfg.v_path = value;
  } else if (key == "out") {
    cfg.out_path = value;
  } else {
    throw UsageError("unknown " + what);
  }
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    if (key == "config") {
      throw UsageError(path + ":" + std::to_string(lineno) + ": config files cannot nest");
    }
    assign(cfg, key, value,
           "config key '" + key + "' (" + path + ":" + std::to_string(lineno) + ")");
  }
}

bool has_input_files(const RunConfig& cfg) {
  return !cfg.q_path.empty() || !cfg.k_path.empty() || !cfg.v_path.empty();
}

void default_seeds(RunConfig& cfg, std::size_t count) {
  if (!cfg.seeds.empty()) return;
  cfg.seeds.resize(count);
  for (std::size_t i = 0; i < count; ++i) cfg.seeds[i] = i;
}

void validate_for_command(RunConfig& cfg) {
  const std::string& c = cfg.command;
  if (c == "bench-spectral") {
    if (cfg.ds.empty()) throw UsageError("bench-spectral requires --d");
    if (cfg.ns.size() != 1) throw UsageError("bench-spectral expects a single --n");
    if (has_input_files(cfg)) {
      throw UsageError("bench-spectral generates its own inputs; --q/--k/--v are not accepted");
    }
    if (cfg.methods.empty()) {
      cfg.methods = {"skyformer_lifted", "naive_nystrom", "truncated_svd"};
    }
    for (const std::string& m : cfg.methods) parse_method(m);
    default_seeds(cfg, 20);
  } else if (c == "bench-runtime") {
    if (cfg.ds.empty()) cfg.ds = {128};
    if (cfg.ds.size() != 1) throw UsageError("bench-runtime expects a single --d");
    if (has_input_files(cfg)) {
      throw UsageError("bench-runtime generates its own inputs; --q/--k/--v are not accepted");
    }
    if (cfg.methods.empty()) cfg.methods = {"kernelized_exact", "skyformer"};
    for (const std::string& m : cfg.methods) parse_kind(m);
  } else if (c == "loewner-audit") {
    if (cfg.ds.empty()) cfg.ds = {32};
    if (cfg.ds.size() != 1) throw UsageError("loewner-audit expects a single --d");
    if (cfg.ns.size() != 1) throw UsageError("loewner-audit expects a single --n");
    if (has_input_files(cfg)) {
      throw UsageError("loewner-audit generates its own inputs; --q/--k/--v are not accepted");
    }
    default_seeds(cfg, 20);
  } else if (c == "spectrum") {
    if (cfg.ns.size() != 1) throw UsageError("spectrum expects a single --n");
    if (cfg.q_path.empty() != cfg.k_path.empty()) {
      throw UsageError("spectrum needs --q and --k together");
    }
    default_seeds(cfg, 1);
  } else if (c == "sensitivity") {
    if (cfg.ns.size() != 1) throw UsageError("sensitivity expects a single --n");
    if (cfg.ds.empty()) cfg.ds = {64};
    if (cfg.ds.size() != 1) throw UsageError("sensitivity expects a single --d");
    if (cfg.kernel != KernelKind::Gaussian) {
      throw UsageError("sensitivity compares the gaussian-kernel paths against softmax;"
                       " --kernel sm is not accepted");
    }
    if (has_input_files(cfg) &&
        (cfg.q_path.empty() || cfg.k_path.empty() || cfg.v_path.empty())) {
      throw UsageError("sensitivity needs --q, --k and --v together");
    }
    if (cfg.methods.empty()) cfg.methods = {"kernelized_exact", "skyformer"};
    for (const std::string& m : cfg.methods) parse_kind(m);
    default_seeds(cfg, 20);
  } else if (c == "check-invariants") {
    // fixed internal configs; no required flags
  } else {
    throw UsageError("unknown command '" + c + "'");
  }
}

SyntheticSpec make_spec(const RunConfig& cfg, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.n = cfg.ns.front();
  spec.p = cfg.p;
  spec.distribution = cfg.distribution;
  spec.sigma = cfg.sigma;
  spec.decay = cfg.decay;
  spec.seed = seed;
  return spec;
}

std::size_t value_width(const RunConfig& cfg) { return cfg.p_v == 0 ? cfg.p : cfg.p_v; }

std::vector<ApproxReport> run_bench_spectral(const RunConfig& cfg) {
  std::vector<Method> methods;
  for (const std::string& m : cfg.methods) methods.push_back(parse_method(m));
  const KernelSpec kernel{cfg.kernel, cfg.p};
  return spectral_sweep(make_spec(cfg, 0), kernel, cfg.ds, cfg.seeds, methods,
                        cfg.with_replacement);
}

std::vector<ApproxReport> run_bench_runtime(const RunConfig& cfg) {
  std::vector<AttentionKindId> kinds;
  for (const std::string& m : cfg.methods) kinds.push_back(parse_kind(m));
  return runtime_sweep(cfg.ns, cfg.ds.front(), cfg.p, value_width(cfg), cfg.kernel, kinds,
                       cfg.repeats);
}

std::vector<ApproxReport> run_loewner_audit(const RunConfig& cfg) {
  const KernelSpec kernel{cfg.kernel, cfg.p};
  const std::vector<LoewnerRecord> records =
      loewner_audit(make_spec(cfg, 0), kernel, cfg.ds.front(), cfg.seeds, cfg.with_replacement);
  std::vector<ApproxReport> reports;
  for (const LoewnerRecord& rec : records) {
    const auto row = [&](const char* metric, double value) {
      reports.push_back({"loewner-audit", cfg.ns.front(), cfg.p, cfg.ds.front(), rec.seed,
                         "skyformer_lifted", kernel_name(cfg.kernel), metric, value});
    };
    row("min_eig", rec.min_eig);
    row("lambda_emp", rec.lambda_emp);
    row("cbar_norm", rec.cbar_norm);
    row("block_err", rec.block_err);
  }
  return reports;
}

std::vector<ApproxReport> run_spectrum(const RunConfig& cfg) {
  DenseMatrix q, k;
  if (!cfg.q_path.empty()) {
    q = load_matrix(cfg.q_path);
    k = load_matrix(cfg.k_path);
    if (q.cols() != k.cols()) {
      throw std::invalid_argument("spectrum: Q and K disagree on column count");
    }
  } else {
    AttentionInput in = generate_qkv(make_spec(cfg, cfg.seeds.front()));
    q = std::move(in.q);
    k = std::move(in.k);
  }
  if (std::max(q.rows(), k.rows()) > kOracleMaxN) {
    throw std::invalid_argument("spectrum: n exceeds the oracle guard (" +
                                std::to_string(kOracleMaxN) + ")");
  }
  const KernelSpec kernel{cfg.kernel, q.cols()};
  const DenseMatrix target = kernel_matrix(kernel, q, k);
  const std::vector<double> sigma = decay_spectrum(target, cfg.top_k);
  std::vector<ApproxReport> reports;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    reports.push_back({"spectrum", q.rows(), q.cols(), i, cfg.seeds.front(), "exact",
                       kernel_name(cfg.kernel), "sigma_ratio", sigma[i]});
  }
  return reports;
}

std::vector<ApproxReport> run_sensitivity(const RunConfig& cfg) {
  std::vector<AttentionKindId> kinds;
  for (const std::string& m : cfg.methods) kinds.push_back(parse_kind(m));
  const bool from_files = has_input_files(cfg);
  AttentionInput fixed;
  if (from_files) {
    fixed.q = load_matrix(cfg.q_path);
    fixed.k = load_matrix(cfg.k_path);
    fixed.v = load_matrix(cfg.v_path);
  }
  std::vector<ApproxReport> reports;
  for (std::uint64_t seed : cfg.seeds) {
    const AttentionInput in =
        from_files ? fixed : generate_qkv(make_spec(cfg, seed), cfg.p_v);
    SkyformerConfig scfg;
    scfg.d = cfg.ds.front();
    scfg.kernel = {KernelKind::Gaussian, in.q.cols()};
    scfg.inverse_mode = cfg.inverse_mode;
    scfg.iter.gamma = cfg.gamma;
    scfg.iter.max_iters = cfg.iters;
    scfg.iter.residual_tol = cfg.tol;
    scfg.seed = seed;
    scfg.with_replacement = cfg.with_replacement;
    for (AttentionKindId kind : kinds) {
      const SensitivityResult r =
          perturbation_sensitivity(in, kind, cfg.perturb_scale, cfg.trials, seed, scfg);
      const std::size_t d_col = kind == AttentionKindId::Skyformer ? cfg.ds.front() : 0;
      const char* kname = kind == AttentionKindId::SoftmaxExact ? "sm" : "gaussian";
      reports.push_back({"sensitivity", in.q.rows(), in.q.cols(), d_col, seed,
                         attention_kind_name(kind), kname, "tau", r.tau});
      reports.push_back({"sensitivity", in.q.rows(), in.q.cols(), d_col, seed,
                         attention_kind_name(kind), kname, "ratio_vs_softmax",
                         r.ratio_vs_softmax});
    }
  }
  return reports;
}

int run_invariants(std::ostream& out) {
  bool all_ok = true;
  const auto report = [&](const char* name, bool ok, const std::string& detail) {
    if (ok) {
      out << "[ok] " << name << '\n';
    } else {
      out << "[FAIL] " << name << ": " << detail << '\n';
      all_ok = false;
    }
  };

  {
    bool ok = true;
    std::string detail;
    for (std::uint64_t seed = 0; seed < 10 && ok; ++seed) {
      const std::size_t p = std::size_t{2} << (seed % 3);
      Rng rng = Rng::derive(seed, {0x66616374ull});
      DenseMatrix q(24, p), k(24, p);
      for (double& x : q.data()) x = 4.0 * rng.next_double() - 2.0;
      for (double& x : k.data()) x = 4.0 * rng.next_double() - 2.0;
      const DenseMatrix direct = kernel_matrix({KernelKind::SoftmaxSM, p}, q, k);
      const DenseMatrix rebuilt = sm_from_gaussian(q, k, p);
      double dev = 0.0;
      for (std::size_t i = 0; i < direct.data().size(); ++i) {
        dev = std::max(dev,
                       std::abs(direct.data()[i] - rebuilt.data()[i]) / direct.data()[i]);
      }
      if (!(dev < 1e-10)) {
        ok = false;
        detail = "seed=" + std::to_string(seed) + " n=24 p=" + std::to_string(p) +
                 " max relative deviation " + format_g17(dev);
      }
    }
    report("factorization identity", ok, detail);
  }

  {
    bool ok = true;
    std::string detail;
    for (std::uint64_t seed = 0; seed < 5 && ok; ++seed) {
      for (KernelKind kind : {KernelKind::Gaussian, KernelKind::SoftmaxSM}) {
        SyntheticSpec spec;
        spec.n = 24;
        spec.p = 4;
        spec.seed = seed;
        const AttentionInput in = generate_qkv(spec);
        Rng rng = Rng::derive(seed, {0x66756c6cull});
        const SubSample s = uniform_subsample(2 * spec.n, 2 * spec.n, false, rng);
        const KernelSpec kernel{kind, spec.p};
        const NystromFactors f = lifted_nystrom(kernel, in.q, in.k, s);
        const double err = nystrom_error(kernel, in.q, in.k, f);
        if (!(err <= 1e-6)) {
          ok = false;
          detail = "seed=" + std::to_string(seed) + " n=24 p=4 kernel=" + kernel_name(kind) +
                   " d=2n without replacement, error " + format_g17(err);
          break;
        }
      }
    }
    report("full-sampling exactness", ok, detail);
  }

  {
    bool ok = true;
    std::string detail;
    SyntheticSpec spec;
    spec.n = 32;
    spec.p = 4;
    std::vector<std::uint64_t> seeds(10);
    for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = i;
    const std::vector<LoewnerRecord> records =
        loewner_audit(spec, {KernelKind::Gaussian, spec.p}, 8, seeds);
    for (const LoewnerRecord& rec : records) {
      const bool ordered = rec.min_eig >= -1e-6 * rec.cbar_norm;
      const bool bounded = rec.block_err <= rec.lambda_emp + 1e-8;
      if (!(ordered && bounded)) {
        ok = false;
        detail = "seed=" + std::to_string(rec.seed) +
                 " n=32 p=4 d=8 kernel=gaussian min_eig=" + format_g17(rec.min_eig) +
                 " lambda_emp=" + format_g17(rec.lambda_emp) +
                 " block_err=" + format_g17(rec.block_err);
        break;
      }
    }
    report("ordering audit", ok, detail);
  }

  {
    bool ok = true;
    std::string detail;
    for (std::uint64_t seed = 0; seed < 10 && ok; ++seed) {
      SyntheticSpec spec;
      spec.n = 32;
      spec.p = 8;
      spec.sigma = 1.5;
      spec.seed = seed;
      const AttentionInput in = generate_qkv(spec);
      const DenseMatrix stacked = stack_rows(in.q, in.k);
      Rng rng = Rng::derive(seed, {0x707265ull});
      const SubSample s = uniform_subsample(stacked.rows(), 16, true, rng);
      const DenseMatrix gram =
          kernel_gram({KernelKind::Gaussian, spec.p}, select_rows(stacked, s.indices));
      const auto [lo, hi] = precondition_spectrum_check(gram, 1e-3);
      if (!(lo > 0.0 && hi <= 1.0 + 1e-10)) {
        ok = false;
        detail = "seed=" + std::to_string(seed) +
                 " d=16 p=8 gamma=1e-3 spectrum [" + format_g17(lo) + ", " + format_g17(hi) +
                 "]";
      }
    }
    report("preconditioner spectrum", ok, detail);
  }

  out << (all_ok ? "all invariant suites passed\n" : "invariant suite failures above\n");
  return all_ok ? 0 : 3;
}

}  // namespace

const char* usage_text() { return kUsage; }

RunConfig parse_config(const std::vector<std::string>& args) {
  if (args.empty()) throw UsageError("missing command");
  RunConfig cfg;
  cfg.command = args[0];
  static const char* const kCommands[] = {"bench-spectral", "bench-runtime", "loewner-audit",
                                          "spectrum",       "sensitivity",   "check-invariants"};
  if (std::find_if(std::begin(kCommands), std::end(kCommands), [&](const char* c) {
        return cfg.command == c;
      }) == std::end(kCommands)) {
    throw UsageError("unknown command '" + cfg.command + "'");
  }
  std::vector<std::pair<std::string, std::string>> flags;
  std::string config_path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.size() < 3 || a.rfind("--", 0) != 0) {
      throw UsageError("expected a flag, got '" + a + "'");
    }
    const std::string key = a.substr(2);
    if (i + 1 >= args.size()) throw UsageError("flag '--" + key + "' expects a value");
    const std::string value = args[++i];
    if (key == "config") {
      config_path = value;
    } else {
      flags.emplace_back(key, value);
    }
  }
  if (!config_path.empty()) apply_config_file(cfg, config_path);
  for (const auto& [key, value] : flags) assign(cfg, key, value, "flag '--" + key + "'");
  validate_for_command(cfg);
  return cfg;
}

int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  (void)err;
  if (cfg.command == "check-invariants") return run_invariants(out);
  std::vector<ApproxReport> reports;
  if (cfg.command == "bench-spectral") {
    reports = run_bench_spectral(cfg);
  } else if (cfg.command == "bench-runtime") {
    reports = run_bench_runtime(cfg);
  } else if (cfg.command == "loewner-audit") {
    reports = run_loewner_audit(cfg);
  } else if (cfg.command == "spectrum") {
    reports = run_spectrum(cfg);
  } else if (cfg.command == "sensitivity") {
    reports = run_sensitivity(cfg);
  } else {
    throw UsageError("unknown command '" + cfg.command + "'");
  }
  if (cfg.out_path.empty()) {
    emit_csv(out, reports);
  } else {
    emit_csv(cfg.out_path, reports);
  }
  return 0;
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  if (args.empty()) {
    err << usage_text();
    return 1;
  }
  if (args[0] == "--help" || args[0] == "-h" || args[0] == "help") {
    out << usage_text();
    return 0;
  }
  try {
    const RunConfig cfg = parse_config(args);
    return run_command(cfg, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace sketchattn
