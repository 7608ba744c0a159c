/*
   Copyright 2026 The fbdg Authors

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

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>

#include "fbdg/error.hpp"
#include "fbdg/version.hpp"
#include "harness/config.hpp"
#include "harness/scenario.hpp"

namespace {

using fbdg::harness::RunContext;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Options {
  std::string config_path;
  std::string preset;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  int workers = 0;
  std::string input;
  std::vector<std::string> overrides;
};

int run(const std::string& name, int (*command)(RunContext&), const Options& opt) {
  using namespace fbdg::harness;
  Config cfg;
  if (!opt.preset.empty()) cfg = Config::load(find_preset(opt.preset));
  if (!opt.config_path.empty()) {
    cfg.merge(Config::load(opt.config_path));
  }
  for (const auto& item : opt.overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw fbdg::Error(fbdg::ErrorCode::kConfig, "--set expects section.key=value, got '" + item + "'");
    }
    cfg.set(item.substr(0, eq), item.substr(eq + 1));
  }

  RunContext ctx;
  ctx.config = cfg;
  ctx.out_dir = opt.out_dir;
  ctx.seed = opt.seed;
  ctx.workers = opt.workers;
  ctx.input = opt.input;

  RunManifest manifest;
  manifest.command = name;
  manifest.config_hash = hash_text(cfg.canonical());
  manifest.master_seed = opt.seed;
  manifest.workers = opt.workers;
  manifest.engine_versions = std::string("fbdg ") + fbdg::kVersion;
  manifest.started_utc = utc_now();
  const int code = command(ctx);
  for (const auto& key : ctx.config.unused_keys()) {
    std::cerr << "warning: unused config key '" << key << "'\n";
  }
  manifest.finished_utc = utc_now();
  manifest.outputs = ctx.outputs;
  manifest.write((std::filesystem::path(opt.out_dir) / "manifest.txt").string());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Floquet-Bogoliubov instability rates, BdG and TWA simulations"};
  app.set_version_flag("--version", std::string(fbdg::kVersion));
  app.require_subcommand(1);
  Options opt;

  struct Sub {
    const char* name;
    const char* help;
    int (*fn)(RunContext&);
  };
  const Sub subs[] = {
      {"rates", "analytic instability rates over a scan", fbdg::harness::cmd_rates},
      {"k0c", "critical amplitude K0c versus drive frequency", fbdg::harness::cmd_k0c},
      {"bdg", "BdG grid scans of the extracted growth rate", fbdg::harness::cmd_bdg},
      {"twa", "truncated Wigner run or g-scan", fbdg::harness::cmd_twa},
      {"endphase", "post-stop excitation versus end phase", fbdg::harness::cmd_endphase},
      {"fit", "fit a decay or growth trace from a CSV file", fbdg::harness::cmd_fit},
  };
  std::string chosen;
  int (*chosen_fn)(RunContext&) = nullptr;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", opt.config_path, "config file (key = value with [section] headers)")
        ->check(CLI::ExistingFile);
    sub->add_option("--preset", opt.preset, "named preset, e.g. paper-11ER; --config values override it");
    sub->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", opt.seed, "master seed")->capture_default_str();
    sub->add_option("--workers", opt.workers, "worker threads (0 = hardware concurrency)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_option("--set", opt.overrides, "override one key, section.key=value");
    if (std::string(s.name) == "fit") sub->add_option("input", opt.input, "trace CSV");
    sub->callback([&chosen, &chosen_fn, s] {
      chosen = s.name;
      chosen_fn = s.fn;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    return run(chosen, chosen_fn, opt);
  } catch (const fbdg::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return fbdg::is_config_error(e.code()) ? kExitConfig : kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}
