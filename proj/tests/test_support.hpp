#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "vaaudit/dataset.hpp"

namespace vaaudit::test {

inline std::filesystem::path repo_root() { return VAAUDIT_REPO_ROOT; }
inline std::filesystem::path sample_dataset() { return repo_root() / "data" / "sample_dataset"; }
inline std::filesystem::path manifesto_dir() { return repo_root() / "data" / "manifestos"; }
inline std::filesystem::path web_fixtures() {
    return repo_root() / "data" / "web_fixtures" / "web_results.jsonl";
}
inline std::filesystem::path golden_dir() { return repo_root() / "tests" / "golden"; }

/// Fresh scratch directory, removed on destruction.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        static std::mt19937_64 rng{std::random_device{}()};
        path = std::filesystem::temp_directory_path() /
               ("vaaudit_" + tag + "_" + std::to_string(rng()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
};

inline Party cdu() {
    return make_party("cdu", "Christlich Demokratische Union Deutschlands (CDU)", "German", "DE",
                      "epp", "EPP");
}

inline Party epp() {
    return make_party("epp", "People's Party (EPP)", "European", "EU", "epp", "EPP");
}

inline Party egp() {
    return make_party("egp", "Green Party (EGP)", "European", "EU", "egp", "GREENS/EFA");
}

inline Statement gender_quota_statement() {
    return Statement{1,
                     "Gender quotas (e.g. a minimum share of positions to be filled by women) are "
                     "to be welcomed",
                     "society"};
}

}  // namespace vaaudit::test
