/*
 * Copyright 2026 The ckernel Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line driver: prep, kernel, solve, eval and verify.

#include <atomic>
#include <csignal>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "ckernel/config.hpp"
#include "ckernel/errors.hpp"
#include "ckernel/experiment.hpp"
#include "ckernel/verify.hpp"

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int) { g_interrupted.store(true); }

struct Overrides {
  std::string config;
  std::optional<unsigned> threads;
  std::optional<std::size_t> tile;
  std::string cache_dir;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

ckernel::ExperimentConfig resolve(const Overrides& o) {
  auto c = ckernel::load_config(o.config);
  if (o.threads) c.threads = *o.threads;
  if (o.tile) c.tile = *o.tile;
  if (!o.cache_dir.empty()) c.cache_dir = o.cache_dir;
  if (!o.out_dir.empty()) c.out_dir = o.out_dir;
  if (o.seed) {
    c.seed = *o.seed;
    c.dataset.seeds.clear();
  }
  if (const char* env = std::getenv("CKERNEL_CACHE_DIR"); env != nullptr && o.cache_dir.empty()) c.cache_dir = env;
  if (const char* env = std::getenv("CKERNEL_OUT_DIR"); env != nullptr && o.out_dir.empty()) c.out_dir = env;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compositional kernel engine"};
  app.require_subcommand(1);
  Overrides o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Experiment config (INI)")->required()->check(CLI::ExistingFile);
    sub->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
    sub->add_option("--tile", o.tile, "Tile edge in images (0 = automatic)");
    sub->add_option("--cache-dir", o.cache_dir, "Tile cache directory");
    sub->add_option("--out-dir", o.out_dir, "Output directory");
    sub->add_option("--seed", o.seed, "Single trial seed (replaces dataset.seeds)");
  };
  auto* prep = app.add_subcommand("prep", "Load, subsample and preprocess datasets");
  auto* kernel = app.add_subcommand("kernel", "Compute train x train and test x train Gram matrices");
  auto* solve = app.add_subcommand("solve", "Lambda sweep, fit, predict and score");
  for (auto* sub : {prep, kernel, solve}) add_common(sub);

  auto* eval = app.add_subcommand("eval", "Aggregate results files into a report");
  std::vector<std::string> inputs;
  std::string eval_out = "report";
  eval->add_option("inputs", inputs, "CSV files with dataset,classifier,correct,n_eval")->required();
  eval->add_option("--out-dir", eval_out, "Report directory");

  auto* verify = app.add_subcommand("verify", "Run the oracle suite");
  std::string level = "quick";
  std::string fault;
  std::uint64_t verify_seed = 1;
  unsigned verify_threads = 0;
  verify->add_option("level", level, "quick or full")->check(CLI::IsMember({"quick", "full"}));
  verify->add_option("--seed", verify_seed, "Seed for random instances");
  verify->add_option("--threads", verify_threads, "Worker threads (0 = all cores)");
  verify->add_option("--fault", fault, "Inject a known operator bug")->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*verify) {
      const auto ops = ckernel::faulty_operators(fault);
      const auto results = ckernel::run_verify(level == "full" ? ckernel::VerifyLevel::Full : ckernel::VerifyLevel::Quick,
                                               ops, verify_seed, verify_threads);
      int failed = 0;
      for (const auto& r : results) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
        failed += r.passed ? 0 : 1;
      }
      if (failed > 0) std::cout << failed << " check(s) failed\n";
      return failed == 0 ? 0 : 1;
    }
    if (*eval) {
      std::vector<std::filesystem::path> paths(inputs.begin(), inputs.end());
      return ckernel::cmd_eval(paths, eval_out, std::cout);
    }
    const auto config = resolve(o);
    if (*prep) return ckernel::cmd_prep(config, std::cout);
    if (*solve) return ckernel::cmd_solve(config, std::cout);
    std::signal(SIGINT, on_sigint);
    return ckernel::cmd_kernel(config, std::cout, &g_interrupted);
  } catch (const ckernel::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.kind() == ckernel::ErrorKind::Interrupted) std::cerr << "completed tiles are cached; rerun to resume\n";
    return e.is_validation() ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
