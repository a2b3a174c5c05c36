// Copyright 2026 The kerr-herald Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// kerr-herald <mode> --config <file> [--threads N] [--seed S] [--out DIR]
// kerr-herald validate --config <file>

#include <iostream>

#include "CLI11.hpp"
#include "kerr_herald_cli.hpp"

namespace cli = kerr_herald::cli;

int main(int argc, char** argv) {
    CLI::App app{"Heralded nonclassical states of a driven Kerr cavity under photon counting"};
    app.set_version_flag("--version", cli::kVersion);
    app.require_subcommand(1);

    std::string config_path;
    int threads = 0;
    std::uint64_t seed = 0;
    std::string out_dir;

    std::vector<CLI::App*> runs;
    for (const auto& mode : cli::modes()) {
        CLI::App* sub = app.add_subcommand(mode, "run the " + mode + " pipeline");
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--threads", threads, "worker threads (default: KERR_HERALD_THREADS, else all cores)")
            ->check(CLI::NonNegativeNumber);
        sub->add_option("--seed", seed, "master seed, overrides trajectory.seed");
        sub->add_option("--out", out_dir, "output directory, overrides output_dir");
        runs.push_back(sub);
    }
    CLI::App* val = app.add_subcommand("validate", "check a configuration without running it");
    val->add_option("--config", config_path, "JSON run configuration")->required();
    std::string val_mode;
    val->add_option("--mode", val_mode, "mode the configuration is meant for");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kSchema;
    }

    std::string text;
    try {
        text = cli::read_text(config_path);
    } catch (const kerr_herald::io::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kIo;
    }

    if (val->parsed()) {
        const auto report = cli::validate(text, val_mode);
        std::cout << report.dump(2) << "\n";
        return report["ok"].get<bool>() ? cli::kOk : cli::kSchema;
    }

    std::string mode;
    CLI::App* chosen = nullptr;
    for (CLI::App* sub : runs)
        if (sub->parsed()) chosen = sub;
    mode = chosen->get_name();

    cli::RunConfig config;
    try {
        config = cli::parse_config(text, mode);
    } catch (const cli::SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return cli::kSchema;
    }

    cli::RunOptions opt;
    opt.threads = threads;
    if (chosen->count("--seed")) opt.seed = seed;
    if (chosen->count("--out")) opt.output_dir = out_dir;
    const cli::RunResult res = cli::run(config, opt);
    if (res.exit_code != cli::kOk) {
        std::cerr << "error: " << res.manifest["error"]["message"].get<std::string>() << "\n";
    } else {
        std::cout << (res.output_dir / "manifest.json").string() << "\n";
    }
    return res.exit_code;
}
