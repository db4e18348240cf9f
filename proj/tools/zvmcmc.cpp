// zvmcmc: zero-variance MCMC experiment runner.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage/config/data error.

#include "zvmcmc/experiment.hpp"
#include "zvmcmc/synthetic.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr const char* kVersion = "zvmcmc 1.0.0";

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> replications;
  std::optional<std::string> degrees;
  bool single_chain = false;
  std::optional<int> threads;
  bool add_intercept = false;
  bool keep_chains = false;
  std::vector<std::string> assignments;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config, "Experiment config (flat JSON)")->required();
  cmd->add_option("--seed", flags.seed, "Base seed");
  cmd->add_option("--out", flags.out, "Output directory");
  cmd->add_option("--replications", flags.replications, "Number of replications");
  cmd->add_option("--degrees", flags.degrees, "Comma-separated polynomial degrees, e.g. 1,2,3");
  cmd->add_flag("--single-chain", flags.single_chain, "Fit and evaluate on the same chain");
  cmd->add_option("--threads", flags.threads, "Worker threads (0 = available parallelism)");
  cmd->add_flag("--add-intercept", flags.add_intercept, "Prepend a column of ones to the design matrix");
  cmd->add_flag("--keep-chains", flags.keep_chains, "Write every chain to <out>/chains/");
  cmd->add_option("--set", flags.assignments, "Override any config field: KEY=VALUE (VALUE as JSON, else a string)");
}

nlohmann::json overrides_from(const CommonFlags& flags) {
  nlohmann::json o = nlohmann::json::object();
  for (const auto& assignment : flags.assignments) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw zv::ConfigError("--set expects KEY=VALUE, got '" + assignment + "'");
    const std::string value = assignment.substr(eq + 1);
    auto parsed = nlohmann::json::parse(value, nullptr, false);
    o[assignment.substr(0, eq)] = parsed.is_discarded() ? nlohmann::json(value) : parsed;
  }
  if (flags.seed) o["seed"] = *flags.seed;
  if (flags.out) o["out"] = *flags.out;
  if (flags.replications) o["replications"] = *flags.replications;
  if (flags.degrees) {
    std::vector<int> degrees;
    std::stringstream ss(*flags.degrees);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        degrees.push_back(std::stoi(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw zv::ConfigError("--degrees: '" + item + "' is not an integer");
      }
    }
    o["degrees"] = degrees;
  }
  if (flags.single_chain) o["single_chain"] = true;
  if (flags.threads) o["threads"] = *flags.threads;
  if (flags.add_intercept) o["add_intercept"] = true;
  if (flags.keep_chains) o["keep_chains"] = true;
  return o;
}

void print_summary(const zv::StudyReport& report) {
  std::cout << "model " << report.model << ", " << report.replications.size() << " replications, protocol "
            << report.protocol << "\n";
  for (const auto& p : report.summary) {
    std::cout << "  " << p.label << ": ordinary mean " << p.ordinary_mean << "\n";
    for (const auto& d : p.degrees) {
      std::cout << "    degree " << d.degree << ": zv mean " << d.zv_mean << ", variance ratio ";
      if (d.ratio.infinite) std::cout << "inf";
      else std::cout << d.ratio.point;
      if (d.ratio.interval_available) std::cout << " [" << d.ratio.lo << ", " << d.ratio.hi << "]";
      std::cout << "\n";
    }
  }
  if (report.partial) std::cout << "  (partial: some replications failed, see study.json)\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-variance MCMC: polynomial control variates for Markov chain output"};
  app.require_subcommand(1);

  CommonFlags run_flags, diag_flags, validate_flags;
  auto* run = app.add_subcommand("run", "Run a replication study and write study.json / study.csv");
  add_common(run, run_flags);
  auto* diagnose = app.add_subcommand("diagnose", "Run one long chain and write diagnostics.json");
  add_common(diagnose, diag_flags);
  auto* validate = app.add_subcommand("validate", "Parse the config and load its data without sampling");
  add_common(validate, validate_flags);
  app.add_subcommand("version", "Print the version");

  std::string generate_kind, generate_out;
  std::uint64_t generate_seed = 1;
  auto* generate = app.add_subcommand("generate", "Write a seeded synthetic dataset");
  generate->add_option("--kind", generate_kind, "banknote or exchange_rate")
      ->required()
      ->check(CLI::IsMember({"banknote", "exchange_rate"}));
  generate->add_option("--seed", generate_seed, "Generator seed");
  generate->add_option("--out", generate_out, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand("version")) {
      std::cout << kVersion << "\n";
      return 0;
    }
    if (generate->parsed()) {
      if (generate_kind == "banknote")
        zv::synthetic::write_banknote_csv(zv::synthetic::banknote(generate_seed), generate_out);
      else
        zv::synthetic::write_price_csv(zv::synthetic::exchange_rate(generate_seed), generate_out);
      std::cout << "wrote " << generate_out << "\n";
      return 0;
    }
    if (validate->parsed()) {
      const auto config = zv::load_config(validate_flags.config, overrides_from(validate_flags));
      const auto model = zv::build_model(config);
      zv::target_functions(config, model);
      std::cout << "ok: " << config.name << " (" << model.name() << ", dimension " << model.dimension() << ")\n";
      return 0;
    }
    if (run->parsed()) {
      const auto config = zv::load_config(run_flags.config, overrides_from(run_flags));
      const auto report = zv::run_study(config);
      zv::export_study(report, config.out);
      print_summary(report);
      std::cout << "wrote " << (std::filesystem::path(config.out) / "study.json").string() << "\n";
      return 0;
    }
    if (diagnose->parsed()) {
      const auto config = zv::load_config(diag_flags.config, overrides_from(diag_flags));
      const auto doc = zv::run_diagnostics(config);
      std::filesystem::create_directories(config.out);
      const auto path = std::filesystem::path(config.out) / "diagnostics.json";
      zv::write_text_file(path, doc.dump(2) + "\n");
      std::cout << "wrote " << path.string() << (doc["advisory_flags"].get<bool>() ? " (advisory flags raised)" : "")
                << "\n";
      return 0;
    }
  } catch (const zv::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const zv::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
