// Command-line front end: encode quantum-information decision problems into
// quantified semialgebraic formulas, check exact witnesses, run bounded-depth
// searches, and build/verify fidelity-threshold gadgets.

#include <iostream>

#include "CLI11.hpp"
#include "qsalg/io.hpp"
#include "qsalg/smtlib.hpp"

using namespace qsalg;

namespace {

constexpr const char* kVersion = "qsalg 0.1.0";

int verdict_exit(const SearchOutcome& out) {
  return out.verdict == SearchOutcome::Verdict::witness ? 0 : 2;
}

Channel channel_from_superop(const std::shared_ptr<const HermitianBasis>& basis,
                             const CMatrix& natural) {
  Channel ch = Channel::from_natural(basis, natural);
  if (!is_trace_preserving_exact(ch) &&
      !is_trace_preserving_certified(ch, Rational(1, Integer(1) << 80)))
    fail(ErrorCode::UsageError, "channel is not trace-preserving");
  if (is_completely_positive(ch).verdict != Cert3::yes)
    fail(ErrorCode::UsageError, "channel is not certified completely positive");
  return ch;
}

ThresholdProblem problem_from_spec(const ThresholdSpec& spec) {
  ThresholdProblem p;
  size_t d = spec.rho.rows();
  auto basis = std::make_shared<HermitianBasis>(hermitian_basis(d));
  for (const auto& nat : spec.superops) p.channels.push_back(channel_from_superop(basis, nat));
  enc::require_density(spec.rho, d, "threshold rho");
  p.rho = spec.rho;
  // normalize the target vector exactly and form the projector
  Scalar norm2{Rational(0)};
  for (const auto& z : spec.phi) norm2 += z.abs2();
  if (norm2.is_exact() && norm2.exact().is_zero())
    fail(ErrorCode::ZeroVector, "phi must be nonzero");
  Scalar inv = Scalar(Rational(1)) / norm2.sqrt();
  std::vector<CScalar> phi;
  for (const auto& z : spec.phi) phi.push_back(CScalar(inv) * z);
  p.phi = detail::projector_of(phi);
  if (!(spec.lambda > 0 && spec.lambda < 1))
    fail(ErrorCode::UsageError, "lambda must lie in (0,1)");
  p.lambda = spec.lambda;
  return p;
}

GadgetBundle bundle_from_spec(const GadgetSpec& spec) {
  if (spec.phi.size() != spec.d)
    fail(ErrorCode::DimensionMismatch, "phi must have length d");
  return build_gadget(spec.lambda, spec.phi, spec.matrices, spec.x, spec.y);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semialgebraic encoders and reachability gadgets for quantum decision problems"};
  app.require_subcommand(1);

  long precision = 256;
  unsigned long seed = 0;
  size_t jobs = 1;
  app.add_option("--precision", precision, "working interval precision in bits")
      ->check(CLI::Range(64L, 8192L));
  app.add_option("--seed", seed, "seed for randomized searches");
  app.add_option("--jobs", jobs, "worker cap for parallel restarts")->check(CLI::Range(1, 64));

  // encode
  auto* enc_cmd = app.add_subcommand("encode", "compile an instance into a formula");
  std::string enc_instance, enc_out, enc_smt;
  bool enc_stats = false;
  enc_cmd->add_option("instance", enc_instance, "instance JSON file")->required();
  enc_cmd->add_option("--out", enc_out, "write the formula as JSON");
  enc_cmd->add_option("--smt", enc_smt, "write an SMT-LIB2 script");
  enc_cmd->add_flag("--stats", enc_stats, "print statistics only");

  // check
  auto* check_cmd = app.add_subcommand("check", "validate an exact witness");
  std::string check_instance, check_witness_path;
  check_cmd->add_option("instance", check_instance)->required();
  check_cmd->add_option("witness", check_witness_path)->required();

  // search
  auto* search_cmd = app.add_subcommand("search", "bounded-depth semi-decision");
  std::string search_instance, search_out;
  size_t search_depth = 6, search_overhang = 64, search_restarts = 24, search_sweeps = 400;
  bool strict = false, nonstrict = false;
  search_cmd->add_option("instance", search_instance)->required();
  search_cmd->add_option("--depth", search_depth, "maximum word length / search depth");
  search_cmd->add_option("--max-overhang", search_overhang, "overhang cap for PCP");
  search_cmd->add_option("--restarts", search_restarts, "numeric search restarts");
  search_cmd->add_option("--sweeps", search_sweeps, "numeric search sweeps per restart");
  search_cmd->add_flag("--strict", strict, "strict threshold comparison (default)");
  search_cmd->add_flag("--nonstrict", nonstrict, "non-strict threshold comparison");
  search_cmd->add_option("--out", search_out, "write the certificate JSON");

  // gadget
  auto* gadget_cmd = app.add_subcommand("gadget", "build or verify reachability gadgets");
  auto* gadget_build = gadget_cmd->add_subcommand("build", "construct a gadget bundle");
  std::string gb_instance, gb_out;
  gadget_build->add_option("instance", gb_instance)->required();
  gadget_build->add_option("--out", gb_out, "bundle output file")->required();
  auto* gadget_verify = gadget_cmd->add_subcommand("verify", "verify a gadget bundle");
  std::string gv_bundle;
  size_t gv_maxlen = 3;
  gadget_verify->add_option("bundle", gv_bundle)->required();
  gadget_verify->add_option("--max-len", gv_maxlen, "verify the identity for all words up to this length");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "run an encoder for n = 1..N");
  std::string sweep_instance, sweep_backend = "numeric", sweep_outdir;
  size_t sweep_nmax = 2;
  sweep_cmd->add_option("instance", sweep_instance)->required();
  sweep_cmd->add_option("--n-max", sweep_nmax)->required();
  sweep_cmd->add_option("--backend", sweep_backend)->check(CLI::IsMember({"numeric", "export"}));
  sweep_cmd->add_option("--out-dir", sweep_outdir, "directory for exported scripts");

  CLI11_PARSE(app, argc, argv);
  ambient_precision() = precision;
  std::cout << "# " << kVersion << " | precision=" << precision << " | seed=" << seed
            << " | jobs=" << jobs << "\n";

  try {
    if (*enc_cmd) {
      InstanceFile inst = load_instance(enc_instance);
      if (!inst.problem)
        fail(ErrorCode::UsageError, "encode expects a problem-encoder instance kind");
      Formula f = encode(*inst.problem);
      FormulaStats stats = formula_stats(f);
      std::cout << "real variables:          " << stats.real_variables << "\n"
                << "atoms:                   " << stats.atoms << "\n"
                << "max total degree:        " << stats.max_total_degree << "\n"
                << "quantifier alternations: " << stats.quantifier_alternations << "\n";
      for (const auto& [k, v] : f.notes) std::cout << "note: " << k << ": " << v << "\n";
      if (!enc_stats) {
        if (!enc_out.empty()) write_json_file(enc_out, formula_to_json(f));
        if (!enc_smt.empty()) write_text_file(enc_smt, export_smt(f));
      }
      return 0;
    }

    if (*check_cmd) {
      InstanceFile inst = load_instance(check_instance);
      if (!inst.problem)
        fail(ErrorCode::UsageError, "check expects a problem-encoder instance kind");
      Formula f = encode(*inst.problem);
      json wj = load_json(check_witness_path);
      Assignment a = assignment_from_json(wj.contains("assignment") ? wj["assignment"] : wj);
      bool ok = check_witness(f, a);
      std::cout << (ok ? "witness: true\n" : "witness: false\n");
      return ok ? 0 : 2;
    }

    if (*search_cmd) {
      InstanceFile inst = load_instance(search_instance);
      // flag overrides the instance's strictness; strict by default
      auto effective_strict = [&](bool instance_default) {
        if (nonstrict) return false;
        if (strict) return true;
        return instance_default;
      };
      SearchOutcome out;
      json cert;
      if (inst.pcp) {
        out = pcp_search(*inst.pcp, search_overhang, search_depth, inst.pcp->claus);
        cert = outcome_to_json(out);
        if (out.verdict == SearchOutcome::Verdict::witness) {
          auto [top, bottom] = pcp_apply(*inst.pcp, out.witness);
          cert["top"] = top;
          cert["bottom"] = bottom;
        }
      } else if (inst.mortality) {
        out = mortality_search(*inst.mortality, search_depth);
        cert = outcome_to_json(out);
      } else if (inst.threshold) {
        ThresholdProblem p = problem_from_spec(*inst.threshold);
        out = threshold_search(p, effective_strict(inst.threshold->strict), search_depth);
        cert = threshold_certificate(p, out, precision);
      } else if (inst.gadget) {
        GadgetBundle b = bundle_from_spec(*inst.gadget);
        ThresholdProblem p = threshold_problem(b);
        out = threshold_search(p, effective_strict(true), search_depth);
        cert = threshold_certificate(p, out, precision);
      } else {
        Formula f = encode(*inst.problem);
        SearchBudget budget;
        budget.restarts = search_restarts;
        budget.max_sweeps = search_sweeps;
        budget.seed = seed;
        budget.jobs = jobs;
        NumericSearchResult res = numeric_search(f, budget);
        cert["verdict"] = res.found ? "witness" : "unknown";
        cert["best_residual"] = res.best_residual;
        if (res.found) cert["assignment"] = assignment_to_json(res.witness);
        std::cout << cert.dump(1) << "\n";
        if (!search_out.empty()) write_json_file(search_out, cert);
        return res.found ? 0 : 2;
      }
      std::cout << cert.dump(1) << "\n";
      if (!search_out.empty()) write_json_file(search_out, cert);
      return verdict_exit(out);
    }

    if (*gadget_cmd) {
      if (*gadget_build) {
        InstanceFile inst = load_instance(gb_instance);
        if (!inst.gadget) fail(ErrorCode::UsageError, "gadget build expects kind \"gadget\"");
        GadgetBundle b = bundle_from_spec(*inst.gadget);
        BundleCheck check = verify_bundle(b);
        for (const auto& msg : check.failures) std::cerr << "invariant failed: " << msg << "\n";
        if (!check.ok) return 1;
        write_json_file(gb_out, bundle_to_json(b));
        std::cout << "bundle written: " << gb_out << " (eps = " << b.eps.get_str() << ")\n";
        return 0;
      }
      if (*gadget_verify) {
        GadgetBundle b = bundle_from_json(load_json(gv_bundle));
        BundleCheck check = verify_bundle(b);
        for (const auto& msg : check.failures) std::cout << "FAIL " << msg << "\n";
        bool all_ok = check.ok;
        // dual-path identity for every word up to the requested length
        Rational tol(1, Integer("100000000000000000000"));  // 1e-20
        size_t k = b.channels.size();
        std::vector<Word> frontier = {{}};
        for (size_t len = 1; len <= gv_maxlen; ++len) {
          std::vector<Word> next;
          for (const auto& w : frontier)
            for (unsigned i = 1; i <= k; ++i) {
              Word ww = w;
              ww.push_back(i);
              next.push_back(ww);
            }
          frontier = std::move(next);
          for (const auto& w : frontier) {
            GadgetIdentity id = verify_gadget_identity(b, w);
            bool ok = id.difference.contains(Rational(0)) && id.difference.width_below(tol);
            if (!ok) {
              all_ok = false;
              std::cout << "FAIL identity at word [";
              for (unsigned l : w) std::cout << l << " ";
              std::cout << "] diff=" << id.difference.str(8) << "\n";
            }
          }
        }
        std::cout << (all_ok ? "bundle verified: all checks passed\n"
                             : "bundle verification failed\n");
        return all_ok ? 0 : 1;
      }
      fail(ErrorCode::UsageError, "gadget requires build or verify");
    }

    if (*sweep_cmd) {
      InstanceFile inst = load_instance(sweep_instance);
      if (!inst.problem) fail(ErrorCode::UsageError, "sweep expects a problem-encoder instance");
      SweepBackend backend =
          sweep_backend == "export" ? SweepBackend::export_only : SweepBackend::numeric;
      SearchBudget budget;
      budget.restarts = 12;
      budget.max_sweeps = 250;
      budget.seed = seed;
      budget.jobs = jobs;
      auto report = sweep(*inst.problem, sweep_nmax, backend, budget);
      bool any_witness = false;
      for (const auto& entry : report) {
        std::cout << "n=" << entry.n << ": ";
        switch (entry.outcome) {
          case SweepEntry::Outcome::witness:
            any_witness = true;
            std::cout << "witness";
            break;
          case SweepEntry::Outcome::unknown:
            std::cout << "unknown (best residual " << entry.best_residual << ")";
            break;
          case SweepEntry::Outcome::exported: {
            std::cout << "exported";
            if (!sweep_outdir.empty()) {
              std::string path = sweep_outdir + "/sweep_n" + std::to_string(entry.n) + ".smt2";
              write_text_file(path, export_smt(entry.formula));
              std::cout << " -> " << path;
            }
            break;
          }
        }
        std::cout << "\n";
      }
      return any_witness ? 0 : 2;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
