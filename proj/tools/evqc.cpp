// Copyright 2026 The evqc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// evqc: experiment runner.
//
//   evqc depth-sweep    --seeds 0,1,2 --depths 2,6,12 --output-dir out
//   evqc ensemble-sweep --config out/ensemble_sweep.config --output-dir again
//   evqc noise-sweep    --noise-grid 0.06,0.1 --members 9 --zne-trace
//   evqc phase-diagram  --depth 2 --members 7 --mode adaboost
//   evqc verify
//
// Exit status: 0 success, 1 failed verification or unexpected error,
// 2 configuration error, 3 numerical failure.

#include <CLI11.hpp>

#include <iostream>

#include "evqc/experiment.hpp"

#ifndef EVQC_DEFAULT_DATA_DIR
#define EVQC_DEFAULT_DATA_DIR "data"
#endif

namespace {

using evqc::ExperimentConfig;

const std::vector<std::string> kBoolKeys{"zne", "zne_trace", "train_noise_free", "loss_trace"};

std::string flag_name(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return "--" + key;
}

/// Every config key except `command`, in echo order.
std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    std::istringstream is(evqc::to_key_values(ExperimentConfig{}));
    std::string line;
    while (std::getline(is, line)) {
        const std::string key = line.substr(0, line.find('='));
        if (key != "command") keys.push_back(key);
    }
    return keys;
}

struct Overrides {
    std::string config_path;
    std::map<std::string, std::string> values;
    std::map<std::string, bool> flags;
};

void add_config_options(CLI::App* sub, Overrides& o, const std::vector<std::string>& keys) {
    sub->add_option("--config", o.config_path, "key=value file, e.g. a config echo")->check(CLI::ExistingFile);
    for (const auto& key : keys) {
        if (std::find(kBoolKeys.begin(), kBoolKeys.end(), key) != kBoolKeys.end()) {
            sub->add_flag(flag_name(key), o.flags[key], "set " + key);
        } else {
            sub->add_option(flag_name(key), o.values[key], "set " + key);
        }
    }
}

ExperimentConfig resolve(const std::string& command, evqc::Task task, const Overrides& o,
                         const CLI::App* sub) {
    ExperimentConfig cfg;
    cfg.train_path = std::string(EVQC_DEFAULT_DATA_DIR) + "/optdigits.tra";
    cfg.test_path = std::string(EVQC_DEFAULT_DATA_DIR) + "/optdigits.tes";
    cfg.task = task;
    if (task == evqc::Task::Spt) {
        cfg.members = 7;
    }
    if (!o.config_path.empty()) cfg = evqc::load_config(o.config_path, cfg);
    for (const auto& [key, value] : o.values) {
        if (sub->count(flag_name(key)) > 0) evqc::set_config_value(cfg, key, value);
    }
    for (const auto& [key, on] : o.flags) {
        if (sub->count(flag_name(key)) > 0) evqc::set_config_value(cfg, key, on ? "true" : "false");
    }
    cfg.command = command;
    cfg.validate();
    return cfg;
}

void print_means(const evqc::CsvTable& t, std::size_t label_column) {
    for (const auto& row : t.rows) {
        if (row.size() > label_column && row[label_column] == "mean") {
            for (std::size_t i = 0; i < row.size() && !row[i].empty(); ++i) std::cout << (i ? " " : "") << row[i];
            std::cout << "\n";
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ensemble variational quantum classifier experiments"};
    app.require_subcommand(1);
    const auto keys = config_keys();

    struct Command {
        std::string name, help;
        evqc::Task task;
        Overrides overrides;
        CLI::App* sub = nullptr;
    };
    std::vector<Command> commands{
        {"depth-sweep", "single classifiers over circuit depths", evqc::Task::Digits, {}},
        {"ensemble-sweep", "bagging and adaboost over ensemble sizes", evqc::Task::Digits, {}},
        {"noise-sweep", "deep, deep+ZNE and ensembles over noise rates", evqc::Task::Digits, {}},
        {"phase-diagram", "SPT phase recognition on a coupling grid", evqc::Task::Spt, {}},
        {"verify", "gradient, extrapolation and boosting-bound checks", evqc::Task::Digits, {}},
    };
    for (auto& c : commands) {
        c.sub = app.add_subcommand(c.name, c.help);
        add_config_options(c.sub, c.overrides, keys);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        for (auto& c : commands) {
            if (!c.sub->parsed()) continue;
            const ExperimentConfig cfg = resolve(c.name, c.task, c.overrides, c.sub);
            if (c.name == "depth-sweep") {
                print_means(evqc::depth_sweep_table(evqc::run_depth_sweep(cfg)), 1);
            } else if (c.name == "ensemble-sweep") {
                print_means(evqc::ensemble_sweep_table(evqc::run_ensemble_sweep(cfg)), 3);
            } else if (c.name == "noise-sweep") {
                print_means(evqc::noise_sweep_table(evqc::run_noise_sweep(cfg)), 2);
            } else if (c.name == "phase-diagram") {
                const auto pd = evqc::run_phase_diagram(cfg);
                std::cout << "grid agreement with exact labels: " << pd.agreement << "\n";
            } else {
                const auto rep = evqc::run_verify(cfg);
                evqc::verify_table(rep).write(std::cout);
                if (!rep.ok()) return 1;
            }
            std::cout << "wrote " << cfg.output_dir << "\n";
        }
    } catch (const evqc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const evqc::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
