// Command line front end for the suites.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "kfree/harness.hpp"

namespace {

struct Options {
  std::string scenario;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<int> ball;
  std::optional<double> lambda;
  std::string format = "json";
};

kfree::Scenario load(const Options& o) {
  kfree::Scenario s = kfree::load_scenario(o.scenario);
  if (o.seed) s.seed = *o.seed;
  if (o.samples) s.sample_count = *o.samples;
  if (o.ball) s.ball_radius = *o.ball;
  if (o.lambda) s.lambda = *o.lambda;
  s.validate();
  return s;
}

std::string render(const std::vector<kfree::Certificate>& certs, const std::string& format) {
  if (format == "csv") {
    std::string out;
    for (std::size_t i = 0; i < certs.size(); ++i) out += kfree::certificate_csv(certs[i], i == 0);
    return out;
  }
  if (format == "text") {
    std::string out;
    for (const auto& c : certs) out += kfree::certificate_text(c);
    return out;
  }
  if (certs.size() == 1) return certs.front().dump(2) + "\n";
  kfree::Certificate all;
  all["suites"] = certs;
  return all.dump(2) + "\n";
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw kfree::InputError("cannot write " + path);
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cylinder covers, nerves and internal rank for Schottky-type groups"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", o.scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "Write the certificate here instead of stdout");
    sub->add_option("--seed", o.seed, "Override the sampling seed");
    sub->add_option("--samples", o.samples, "Override the sample count");
    sub->add_option("--ball", o.ball, "Override the word-ball radius")->check(CLI::PositiveNumber);
    sub->add_option("--lambda", o.lambda, "Override lambda (default log(2k-1))")->check(CLI::PositiveNumber);
    sub->add_option("--format", o.format, "Output format")
        ->check(CLI::IsMember({"json", "csv", "text"}));
  };

  const std::vector<std::pair<std::string, std::string>> suites = {
      {"main-search", "Search for a point P with IR(S_lambda(P)) <= k-3"},
      {"lemma51", "Rank of Theta over every nerve simplex"},
      {"rank-lemma", "Inductive rank bound over stratum components"},
      {"displacement", "Log(2k-1) displacement inequality at sample points"},
      {"tree", "Component graph, tree test and the partial action"},
      {"all", "Every suite"}};
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, help] : suites) {
    subs[name] = app.add_subcommand(name, help);
    add_common(subs[name]);
  }

  std::size_t rank = 2;
  std::uint64_t make_seed = 1;
  int make_k = 3;
  std::string make_name = "schottky";
  auto* make = app.add_subcommand("make-schottky", "Write a random ping-pong-certified scenario");
  make->add_option("--rank", rank, "Number of generators")->check(CLI::Range(1, 26));
  make->add_option("--seed", make_seed, "Generator seed");
  make->add_option("--k", make_k, "k for the scenario")->check(CLI::Range(3, 1000));
  make->add_option("--name", make_name, "Scenario name");
  make->add_option("--out", o.out, "Output file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (make->parsed()) {
      std::mt19937_64 rng(make_seed);
      auto gens = kfree::random_schottky(rank, rng);
      auto s = kfree::scenario_for(make_name, gens, make_k);
      s.seed = make_seed;
      emit(kfree::to_json(s).dump(2) + "\n", o.out);
      return 0;
    }
    const kfree::HarnessContext ctx(load(o));
    std::vector<kfree::Certificate> certs;
    auto want = [&](const char* n) { return subs.at(n)->parsed() || subs.at("all")->parsed(); };
    if (want("main-search")) certs.push_back(kfree::run_main_search(ctx));
    if (want("lemma51")) certs.push_back(kfree::run_lemma51_suite(ctx));
    if (want("rank-lemma")) certs.push_back(kfree::run_rank_lemma_suite(ctx));
    if (want("displacement")) certs.push_back(kfree::run_displacement_suite(ctx));
    if (want("tree")) certs.push_back(kfree::run_tree_suite(ctx));
    emit(render(certs, o.format), o.out);
    bool ok = true;
    for (const auto& c : certs) ok = ok && kfree::certificate_passed(c);
    return ok ? 0 : 1;
  } catch (const kfree::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
