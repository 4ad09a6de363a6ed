#pragma once

// Spawns the built command-line tool and captures exit code and streams.
// Including targets define TDO_CLI_PATH to the binary's location.

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

namespace tdo::testing {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

inline std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out.push_back(c);
    }
    out.push_back('\'');
    return out;
}

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline CliResult run_cli_at(const std::string& exe, const std::vector<std::string>& args,
                            const std::map<std::string, std::string>& env = {},
                            const std::string& stdin_file = "") {
    std::string out_path = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") +
                           "/tdo-cli-out." + std::to_string(::getpid());
    std::string err_path = out_path + ".err";
    std::string cmd = "env";
    for (const auto& [k, v] : env) cmd += " " + shell_quote(k + "=" + v);
    cmd += " " + shell_quote(exe);
    for (const auto& a : args) cmd += " " + shell_quote(a);
    if (!stdin_file.empty()) cmd += " < " + shell_quote(stdin_file);
    cmd += " > " + shell_quote(out_path) + " 2> " + shell_quote(err_path);

    int status = std::system(cmd.c_str());
    CliResult result;
    if (status != -1 && WIFEXITED(status)) result.code = WEXITSTATUS(status);
    result.out = slurp(out_path);
    result.err = slurp(err_path);
    std::remove(out_path.c_str());
    std::remove(err_path.c_str());
    return result;
}

#ifdef TDO_CLI_PATH
inline CliResult run_cli(const std::vector<std::string>& args,
                         const std::map<std::string, std::string>& env = {},
                         const std::string& stdin_file = "") {
    return run_cli_at(TDO_CLI_PATH, args, env, stdin_file);
}
#endif

} // namespace tdo::testing
