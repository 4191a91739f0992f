#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "injurycast/csv.hpp"
#include "injurycast/errors.hpp"
#include "injurycast/pipeline.hpp"

using namespace injurycast;

namespace {

int fail(const char* kind, int code, const std::vector<std::string>& messages) {
    nlohmann::ordered_json j;
    j["error"] = kind;
    j["exit_code"] = code;
    j["messages"] = messages;
    std::cerr << j.dump() << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Injury-risk forecasting pipeline"};
    std::string command;
    std::string config_path;
    std::string commands;
    for (const auto& c : subcommands()) commands += (commands.empty() ? "" : " | ") + c;
    app.add_option("command", command, commands)->required()->check(CLI::IsMember(subcommands()));
    app.add_option("-c,--config", config_path, "run config file ([section] / key = value)");

    std::map<std::string, std::string> overrides;
    std::map<std::string, std::string> flag_values;
    for (const auto& k : config_keys()) {
        auto* opt = app.add_option("--" + flag_name(k.key), flag_values[k.key], k.help);
        opt->group("[" + k.section + "]");
        if (!k.default_value.empty()) opt->option_text("(default: " + k.default_value + ")");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("config", 2, {e.what()});
    }

    try {
        for (const auto& k : config_keys())
            if (app.count("--" + flag_name(k.key)) > 0) overrides[k.key] = flag_values[k.key];
        std::map<std::string, std::string> file_values;
        if (!config_path.empty()) {
            if (!std::filesystem::is_regular_file(config_path))
                throw ConfigError("config file not found: " + config_path);
            file_values = parse_config_text(csv::read_file(config_path));
        }
        const RunConfig cfg = resolve_config(file_values, overrides);
        const auto dir = run_command(command, cfg);
        nlohmann::ordered_json j;
        j["status"] = "ok";
        j["command"] = command;
        j["run_dir"] = dir.string();
        std::cout << j.dump() << '\n';
        return 0;
    } catch (const ConfigError& e) {
        return fail("config", 2, e.messages());
    } catch (const DataError& e) {
        return fail("data", 3, {e.what()});
    } catch (const TrainingError& e) {
        return fail("training", 4, {e.what()});
    } catch (const std::exception& e) {
        return fail("internal", 1, {e.what()});
    }
}
