#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ckm/report.hpp"

namespace fs = std::filesystem;
using ckm::json;

namespace {

int exit_code(ckm::ErrorKind k) {
  switch (k) {
    case ckm::ErrorKind::Infeasible: return 2;
    case ckm::ErrorKind::CutRoundCap: return 3;
    default: return 1;
  }
}

void report_error(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << "\n";
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

std::string csv_num(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

std::string csv_field(const json& j) {
  if (j.is_null()) return "";
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  return csv_num(j.get<double>());
}

// One CSV row per instance file; stages that cannot run leave their columns empty.
std::string bench_row(const fs::path& file, double eps) {
  const auto t0 = std::chrono::steady_clock::now();
  const ckm::Instance inst = ckm::read_instance(file.string());
  json lpBasic, lpRect, cuts, cost, openings, bound, exact;
  try {
    lpBasic = ckm::solve_lp(ckm::build_basic_lp(inst)).objective;
    if (inst.colocated) {
      const auto res = ckm::cut_loop(inst, {eps, ckm::kDefaultMaxCutRounds, 1e-7});
      lpRect = res.rectValue;
      cuts = res.cuts.size();
      cost = res.rounding.solution->assignment.cost;
      openings = res.rounding.diag.openings;
      bound = res.rounding.diag.openingBound;
    } else if (inst.numFacilities <= ckm::kMaxBruteForceFacilities) {
      const auto res = ckm::exhaustive_cut_loop(inst);
      lpRect = res.rectValue;
      cuts = res.cuts.size();
    }
  } catch (const ckm::Error& e) {
    std::cerr << file.filename().string() << ": " << e.what() << "\n";
  }
  try {
    exact = ckm::exact_or_skip(inst, inst.k, false);
  } catch (const ckm::Error& e) {
    std::cerr << file.filename().string() << ": exact: " << e.what() << "\n";
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  json ratioLp, ratioExact;
  if (!cost.is_null()) {
    if (!lpRect.is_null()) ratioLp = ckm::ratio_or_null(cost, lpRect.get<double>());
    if (!exact.is_null()) ratioExact = ckm::ratio_or_null(cost, exact.get<double>());
  }
  std::ostringstream row;
  row << file.filename().string() << ',' << inst.numFacilities + inst.numClients << ',' << inst.k << ','
      << inst.u << ',' << csv_num(eps) << ',' << csv_field(lpBasic) << ',' << csv_field(lpRect) << ','
      << csv_field(cuts) << ',' << csv_field(cost) << ',' << csv_field(openings) << ',' << csv_field(bound)
      << ',' << csv_field(exact) << ',' << csv_field(ratioLp) << ',' << csv_field(ratioExact) << ','
      << csv_num(ms);
  return row.str();
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) ckm::fail(ckm::ErrorKind::Parse, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    ckm::fail(ckm::ErrorKind::Parse, path + ": " + e.what());
  }
}

void check_eps(double eps) {
  if (!(eps > 0.0 && eps <= 2.0)) ckm::fail(ckm::ErrorKind::Parameter, "eps must lie in (0, 2]");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uniform capacitated k-median: rectangle LP, rounding, reduction and gap experiments"};
  app.require_subcommand(1);

  std::string family, out, in, trace, hardPath, softPath, dir, mode = "basic";
  int u = 0, k = 0, maxRounds = ckm::kDefaultMaxCutRounds;
  std::uint64_t seed = 0;
  double eps = 0.5, tol = 1e-7;
  bool soft = false;

  auto* gen = app.add_subcommand("gen", "Generate a gap instance");
  gen->add_option("--family", family)->required()->check(CLI::IsMember({"groups", "expander"}));
  gen->add_option("--u", u)->required();
  gen->add_option("--seed", seed);
  gen->add_option("--out", out)->required();

  auto* solve = app.add_subcommand("solve", "Solve the natural or the rectangle relaxation");
  solve->add_option("--in", in)->required();
  solve->add_option("--mode", mode)->required()->check(CLI::IsMember({"basic", "rect"}));
  solve->add_option("--eps", eps);
  solve->add_option("--max-cut-rounds", maxRounds);
  solve->add_option("--tol", tol);

  auto* round = app.add_subcommand("round", "Round-or-separate until an integral solution is found");
  round->add_option("--in", in)->required();
  round->add_option("--eps", eps)->required();
  round->add_option("--trace", trace);

  auto* exact = app.add_subcommand("exact", "Exact optimum by enumeration");
  exact->add_option("--in", in)->required();
  exact->add_option("--k", k)->required();
  exact->add_flag("--soft", soft);

  auto* reduce = app.add_subcommand("reduce", "Turn a soft solution into a hard one");
  reduce->add_option("--hard", hardPath)->required();
  reduce->add_option("--soft-solution", softPath)->required();

  auto* gap = app.add_subcommand("gapdemo", "Run the groups and expander gap experiments");
  gap->add_option("--u", u)->required();
  gap->add_option("--seed", seed);

  auto* bench = app.add_subcommand("bench", "CSV summary over a directory of instances");
  bench->add_option("--dir", dir)->required();
  bench->add_option("--eps", eps)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    report_error("usage", e.what());
    return 1;
  }

  try {
    if (*gen) {
      const ckm::Instance inst = family == "groups" ? ckm::gen_gap_groups(u) : ckm::gen_expander_gap(u, seed);
      ckm::write_instance(inst, out);
      emit({{"written", out}, {"family", family}, {"seed", seed}, {"instance", ckm::summary_json(inst)}});
    } else if (*solve) {
      check_eps(eps);
      if (maxRounds < 1) ckm::fail(ckm::ErrorKind::Parameter, "--max-cut-rounds must be positive");
      if (!(tol > 0.0)) ckm::fail(ckm::ErrorKind::Parameter, "--tol must be positive");
      const ckm::Instance inst = ckm::read_instance(in);
      emit(mode == "basic" ? ckm::solve_basic_report(inst, tol)
                           : ckm::solve_rect_report(inst, {eps, maxRounds, tol}));
    } else if (*round) {
      check_eps(eps);
      const ckm::Instance inst = ckm::read_instance(in);
      json tj;
      const json r = ckm::round_report(inst, eps, trace.empty() ? nullptr : &tj);
      if (!trace.empty()) {
        std::ofstream t(trace);
        if (!t) ckm::fail(ckm::ErrorKind::Parse, "cannot write " + trace);
        t << tj.dump(2) << "\n";
      }
      emit(r);
      std::cerr << "rounded: " << r["openings"] << " openings (bound " << r["bound"] << "), cost "
                << r["integralCost"] << "\n";
    } else if (*exact) {
      emit(ckm::exact_report(ckm::read_instance(in), k, soft));
    } else if (*reduce) {
      const ckm::Instance hard = ckm::read_instance(hardPath);
      const ckm::SoftSolution s = ckm::soft_from_json(read_json_file(softPath), hard.numClients);
      emit(ckm::reduce_report(hard, s));
    } else if (*gap) {
      const json r = ckm::gapdemo_report(u, seed);
      emit(r);
      std::cerr << "groups: basic " << r["groups"]["lpBasicValue"] << ", rect " << r["groups"]["lpRectValue"]
                << ", exact " << r["groups"]["exactOpt"] << "\n";
    } else if (*bench) {
      check_eps(eps);
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
      std::sort(files.begin(), files.end());
      std::cout << "instance,n,k,u,eps,lp_basic,lp_rect,cuts,integral_cost,openings,bound,exact,ratio_lp,"
                   "ratio_exact,ms\n";
      for (const auto& f : files) std::cout << bench_row(f, eps) << "\n";
    }
  } catch (const ckm::Error& e) {
    report_error(std::string(ckm::to_string(e.kind())), e.what());
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    report_error("io", e.what());
    return 1;
  } catch (const std::exception& e) {
    report_error("internal", e.what());
    return 1;
  }
  return 0;
}
