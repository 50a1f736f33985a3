#include <iostream>

#include <CLI11.hpp>

#include "hdl/cli.hpp"

int main(int argc, char** argv) {
  hdl::RunConfig cfg;
  CLI::App app{"Induced characters of GL_n over truncated power series rings"};
  app.require_subcommand(1);
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"group", "orders of G, its congruence kernels, T, U^± and TU^±"},
      {"torus", "torus order, rational Weyl group, characters and root norm images"},
      {"chars", "torus characters with β and the genericity flags"},
      {"verify-main", "degree and norm of Ind θ̃ for generic θ"},
      {"prop35", "stabilizer / regular / general-position sets; equality asserted for Coxeter tori"},
      {"letellier", "pairings of invariant characters of M_n(F_q) with witness characters"},
      {"mackey-check", "Mackey and Frobenius reciprocity agreement with direct inner products"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--p", cfg.p, "characteristic")->check(CLI::PositiveNumber);
    sub->add_option("--m", cfg.m, "q = p^m")->check(CLI::PositiveNumber);
    sub->add_option("--n", cfg.n, "rank")->check(CLI::PositiveNumber);
    sub->add_option("--r", cfg.r, "level of O_r")->check(CLI::PositiveNumber);
    sub->add_option("--torus", cfg.torus, "torus cycle type, e.g. 2,1 (default: Coxeter)");
    sub->add_option("--theta", cfg.theta, "all | generic | index | (a,b,...)");
    sub->add_option("--mode", cfg.mode, "numeric | exact | both")->check(CLI::IsMember({"numeric", "exact", "both"}));
    sub->add_option("--format", cfg.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--cache-dir", cfg.cache_dir, "directory for element tables");
    sub->add_option("--workers", cfg.workers, "worker threads")->check(CLI::PositiveNumber);
    sub->callback([&cfg, name = name] { cfg.command = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : hdl::kInvalid;
  }
  double ms = 0;
  auto res = hdl::run_command(cfg, &ms);
  res.body["timing_ms"] = ms;
  if (cfg.format == "csv")
    std::cout << hdl::render_csv(res.body);
  else
    std::cout << res.body.dump(2) << "\n";
  if (res.exit_code != hdl::kPass && res.body.at("result").contains("error"))
    std::cerr << "error: " << res.body.at("result").at("error").get<std::string>() << "\n";
  return res.exit_code;
}
