// nlfpe: command-line front end for the Fokker-Planck, Monte Carlo and filter experiments.
//
//   nlfpe fpe solve|asym|convergence|maxprinciple [options]
//   nlfpe mc compare [options]
//   nlfpe filter run [options]
//
// Options override the keys of --config. Exit codes: 0 ok, 2 config error,
// 3 numerical failure, 1 anything else.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "nlfpe/errors.hpp"
#include "nlfpe/experiments.hpp"
#include "nlfpe/expression.hpp"

namespace {

using nlohmann::json;

enum class FlagType { number, integer, text, text_or_number, number_list, json_value };

struct Flag {
  const char* name;
  const char* key;
  FlagType type;
  const char* help;
};

const std::vector<Flag>& flags() {
  static const std::vector<Flag> table{
      {"--preset", "preset", FlagType::text, "example1, example2 or example53"},
      {"--f", "f", FlagType::text, "drift expression in x"},
      {"--f-d1", "f_d1", FlagType::text, "derivative of the drift"},
      {"--g", "g", FlagType::text_or_number, "Gaussian intensity: number or expression"},
      {"--sigma", "sigma", FlagType::text, "jump intensity expression"},
      {"--sigma-d1", "sigma_d1", FlagType::text, "first derivative of sigma"},
      {"--sigma-d2", "sigma_d2", FlagType::text, "second derivative of sigma"},
      {"--alpha", "alpha", FlagType::number, "stability index in (0, 2)"},
      {"--beta", "beta", FlagType::number, "skewness in (-1, 1)"},
      {"--monotonicity", "monotonicity", FlagType::text, "positive_increasing or negative_decreasing"},
      {"--h", "h", FlagType::number, "mesh width"},
      {"--dt", "dt", FlagType::number, "time step"},
      {"--L-tilde", "L_tilde", FlagType::number, "half width of the natural grid"},
      {"--boundary", "boundary", FlagType::text, "absorbing or natural"},
      {"--t0", "t0", FlagType::number, "initial time"},
      {"--t-final", "t_final", FlagType::number, "final time"},
      {"--stepper", "stepper", FlagType::text, "explicit or implicit"},
      {"--sigma-bound", "sigma_bound", FlagType::number, "M~ for the explicit stability bound"},
      {"--k-init", "k_init", FlagType::number, "initial density sqrt(k/pi) exp(-k x^2)"},
      {"--snapshots", "snapshots", FlagType::number_list, "comma separated output times"},
      {"--levels", "levels", FlagType::integer, "refinement levels, reference included"},
      {"--trials", "trials", FlagType::integer, "random initial states"},
      {"--steps", "steps", FlagType::integer, "explicit steps per trial"},
      {"--dt-fraction", "dt_fraction", FlagType::number, "dt as a fraction of dt_max"},
      {"--paths", "paths", FlagType::integer, "Monte Carlo paths"},
      {"--mc-dt", "mc_dt", FlagType::number, "Euler-Maruyama step"},
      {"--T", "T", FlagType::number, "filter horizon"},
      {"--delta", "delta", FlagType::number, "filter window length"},
      {"--snapshot-stride", "snapshot_stride", FlagType::integer, "windows between density snapshots"},
      {"--seed", "seed", FlagType::integer, "random seed"},
      {"--threads", "threads", FlagType::integer, "worker threads (0: all cores)"},
      {"--output-dir,-o", "output_dir", FlagType::text, "output directory"},
      {"--sweep", "sweep", FlagType::json_value, "JSON array of override objects"},
  };
  return table;
}

json flag_value(const Flag& f, const std::string& raw) {
  const auto parse_number = [&](const std::string& s) -> json {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw nlfpe::ConfigError(f.key, "expected a number, got '" + s + "'");
    }
  };
  switch (f.type) {
    case FlagType::number: return parse_number(raw);
    case FlagType::integer: {
      try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(raw, &used);
        if (used != raw.size() || raw.front() == '-') throw std::invalid_argument(raw);
        return v;
      } catch (const std::exception&) {
        throw nlfpe::ConfigError(f.key, "expected a nonnegative integer, got '" + raw + "'");
      }
    }
    case FlagType::text: return raw;
    case FlagType::text_or_number: {
      try {
        std::size_t used = 0;
        const double v = std::stod(raw, &used);
        if (used == raw.size()) return v;
      } catch (const std::exception&) {
      }
      return raw;
    }
    case FlagType::number_list: {
      json list = json::array();
      std::stringstream ss(raw);
      std::string item;
      while (std::getline(ss, item, ',')) list.push_back(parse_number(item));
      return list;
    }
    case FlagType::json_value:
      try {
        return json::parse(raw);
      } catch (const json::parse_error& e) {
        throw nlfpe::ConfigError(f.key, e.what());
      }
  }
  return raw;
}

json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw nlfpe::ConfigError("config", "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw nlfpe::ConfigError("config", "'" + path + "': " + e.what());
  }
}

struct Leaf {
  CLI::App* app;
  const char* kind;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fokker-Planck solvers, Monte Carlo checks and filtering for SDEs with alpha-stable noise"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);

  std::string config_path;
  std::map<std::string, std::string> raw;
  std::vector<Leaf> leaves;

  auto add_leaf = [&](CLI::App* parent, const char* name, const char* kind, const char* help) {
    CLI::App* leaf = parent->add_subcommand(name, help);
    leaf->set_help_flag("--help", "Print this help message and exit");
    leaf->add_option("--config,-c", config_path, "JSON config file");
    for (const auto& f : flags()) {
      leaf->add_option_function<std::string>(
          f.name, [&raw, key = std::string(f.key)](const std::string& v) { raw[key] = v; }, f.help);
    }
    leaves.push_back({leaf, kind});
  };

  CLI::App* fpe = app.add_subcommand("fpe", "Fokker-Planck solvers");
  fpe->require_subcommand(1);
  add_leaf(fpe, "solve", "fpe_symmetric", "symmetric-noise scheme; writes density.csv");
  add_leaf(fpe, "asym", "fpe_asymmetric", "skewed-noise scheme (backward Euler); writes density.csv");
  add_leaf(fpe, "convergence", "convergence", "self-convergence study; writes convergence.csv");
  add_leaf(fpe, "maxprinciple", "max_principle", "discrete maximum principle audit");
  CLI::App* mc = app.add_subcommand("mc", "Monte Carlo cross-checks");
  mc->require_subcommand(1);
  add_leaf(mc, "compare", "mc_compare", "killed Euler-Maruyama paths against the PDE density");
  CLI::App* filter = app.add_subcommand("filter", "nonlinear filtering");
  filter->require_subcommand(1);
  add_leaf(filter, "run", "filter", "twin experiment and Zakai filter");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const char* kind = nullptr;
    for (const auto& l : leaves) {
      if (l.app->parsed()) kind = l.kind;
    }
    json config = config_path.empty() ? json::object() : read_config_file(config_path);
    if (!config.is_object()) throw nlfpe::ConfigError("config", "expected a JSON object");
    if (config.contains("kind") && config.at("kind") != kind) {
      throw nlfpe::ConfigError("kind", "config file is for '" + config.at("kind").dump() + "'");
    }
    config["kind"] = kind;
    for (const auto& f : flags()) {
      const auto it = raw.find(f.key);
      if (it != raw.end()) config[f.key] = flag_value(f, it->second);
    }
    const json manifest = nlfpe::execute(config);
    for (const auto& run : manifest.at("runs")) std::cout << run.at("summary").dump() << '\n';
    return 0;
  } catch (const nlfpe::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const nlfpe::PreconditionError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const nlfpe::DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const nlfpe::IntegrationError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const nlfpe::SingularSystemError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const nlfpe::FilterDegeneracyError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
