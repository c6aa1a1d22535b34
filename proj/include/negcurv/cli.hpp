#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace negcurv::cli {

std::vector<std::string> subcommands();

/// Resolved settings of one run: schema defaults, then the config file, then
/// command-line flags, then --set overrides. Keys are "section.key".
struct RunConfig {
    std::string subcommand;
    std::map<std::string, std::string> values;
    std::filesystem::path out_dir;

    const std::string& text(const std::string& key) const;
    double number(const std::string& key) const;
    long integer(const std::string& key) const;
    bool flag(const std::string& key) const;
    std::vector<double> numbers(const std::string& key) const;
    std::uint64_t seed() const { return static_cast<std::uint64_t>(integer("run.seed")); }

    nlohmann::json to_json() const;
};

/// Throws ConfigError for unknown subcommands or keys, malformed --set entries
/// and INI syntax errors, naming the key and the file line where possible.
RunConfig load_config(const std::string& subcommand, const std::optional<std::filesystem::path>& config_file,
                      const std::vector<std::pair<std::string, std::string>>& overrides,
                      const std::filesystem::path& out_dir);

std::string sha256_hex(const std::string& bytes);

/// Entry point. Exit codes: 0 success, 1 usage, configuration or verification
/// failure, 2 numerical failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace negcurv::cli
