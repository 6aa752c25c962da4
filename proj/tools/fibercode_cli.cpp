// fibercode: batch driver for the link, coding and shaping experiments.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fibercode/config.hpp"
#include "fibercode/experiments.hpp"
#include "fibercode/fiber.hpp"
#include "fibercode/stats.hpp"

namespace fs = std::filesystem;
using namespace fibercode;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitBlowup = 3;

struct Common {
  std::string config_path;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::string scale = "desk";
};

config::Config load_config(const Common& common) {
  if (common.config_path.empty()) return {};
  return config::Config::load(common.config_path);
}

std::ofstream open_output(const Common& common, const std::string& name) {
  fs::create_directories(common.out_dir);
  const auto path = fs::path(common.out_dir) / name;
  std::ofstream out(path);
  if (!out) throw config::ConfigError("cannot write " + path.string());
  std::cerr << "writing " << path.string() << "\n";
  return out;
}

void warn_unused(const config::Config& cfg) {
  for (const auto& key : cfg.unused_keys()) std::cerr << "warning: config key '" << key << "' ignored\n";
}

void warn_scale(experiments::Scale scale) {
  if (scale == experiments::Scale::Paper)
    std::cerr << "warning: paper scale selected; expect runs of hours\n";
}

int capacity_sweep(const Common& common) {
  const auto cfg = load_config(common);
  const auto scale = experiments::parse_scale(common.scale);
  const auto sweep = experiments::CapacityConfig::from(cfg, scale);
  warn_unused(cfg);
  warn_scale(scale);
  const auto rows = experiments::run_capacity_sweep(sweep, common.seed);
  auto out = open_output(common, "capacity.csv");
  experiments::write_capacity_csv(out, rows, cfg.hash(), common.seed);
  if (sweep.write_models) {
    for (const auto& r : rows) {
      std::ostringstream name;
      name << "model_L" << static_cast<long long>(r.length / 1e3) << "km_" << rx::to_string(r.compensation)
           << "_P" << r.power_dbm << "dBm.csv";
      auto m = open_output(common, name.str());
      stats::write_model_csv(m, r.model);
    }
  }
  return 0;
}

int ber_waterfall(const Common& common) {
  const auto cfg = load_config(common);
  const auto scale = experiments::parse_scale(common.scale);
  const auto wf = experiments::WaterfallConfig::from(cfg, scale);
  warn_unused(cfg);
  warn_scale(scale);
  const auto rows = experiments::run_ber_waterfall(wf, common.seed);
  auto out = open_output(common, "waterfall.csv");
  experiments::write_waterfall_csv(out, rows, cfg.hash(), common.seed);
  return 0;
}

int pragmatic(const Common& common) {
  const auto cfg = load_config(common);
  const auto scale = experiments::parse_scale(common.scale);
  const auto pc = experiments::PragmaticConfig::from(cfg, scale);
  warn_unused(cfg);
  warn_scale(scale);
  const auto row = experiments::run_pragmatic_endtoend(pc, common.seed);
  auto out = open_output(common, "pragmatic.csv");
  experiments::write_pragmatic_csv(out, {row}, cfg.hash(), common.seed);
  return 0;
}

int shape_demo(const Common& common) {
  const auto cfg = load_config(common);
  const auto scale = experiments::parse_scale(common.scale);
  const auto sd = experiments::ShapeDemoConfig::from(cfg, scale);
  warn_unused(cfg);
  std::vector<experiments::ShapeDemoRow> rows;
  for (std::size_t i = 0; i < sd.K.size(); ++i)
    rows.push_back(experiments::run_shape_demo(sd.K[i], sd.symbols, sd.traceback,
                                               experiments::derive_seed(common.seed, i)));
  auto out = open_output(common, "shaping.csv");
  experiments::write_shape_csv(out, rows, cfg.hash(), common.seed);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fiber link simulation and pragmatic coded-modulation experiments"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "key = value config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "master seed");
    sub->add_option("--out", common.out_dir, "output directory");
    sub->add_option("--scale", common.scale, "default sizes")->check(CLI::IsMember({"desk", "paper"}));
  };
  auto* cap = app.add_subcommand("capacity-sweep", "MI vs launch power for BP and EQ receivers");
  auto* ber = app.add_subcommand("ber-waterfall", "staircase BER over a binary symmetric channel");
  auto* prag = app.add_subcommand("pragmatic-e2e", "full coded-modulation chain over the fiber link");
  auto* shp = app.add_subcommand("shape-demo", "trellis shaping energy and recovery");
  for (auto* sub : {cap, ber, prag, shp}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (cap->parsed()) return capacity_sweep(common);
    if (ber->parsed()) return ber_waterfall(common);
    if (prag->parsed()) return pragmatic(common);
    if (shp->parsed()) return shape_demo(common);
  } catch (const config::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fiber::NumericalBlowup& e) {
    std::cerr << "numerical blow-up: " << e.what() << "\n";
    return kExitBlowup;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
