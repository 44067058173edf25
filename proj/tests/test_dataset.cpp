#include <doctest.h>

#include <fstream>
#include <set>

#include "test_support.hpp"
#include "vaaudit/dataset.hpp"
#include "vaaudit/util.hpp"

using namespace vaaudit;
using namespace vaaudit::test;

TEST_CASE("sample dataset loads with the expected shape") {
    Questionnaire q = load_dataset(sample_dataset());
    CHECK(q.statements.size() == 30);
    CHECK(q.parties.size() == 27);
    CHECK(q.answers.size() == 27 * 30);
    CHECK(validate_dataset(q, 30).empty());
}

TEST_CASE("loading is order-independent and a pure function of file bytes") {
    TempDir tmp("shuffled");
    for (const char* name : {"statements.jsonl", "parties.jsonl", "answers.jsonl"}) {
        auto lines = split(read_file((sample_dataset() / name).string()), '\n');
        std::vector<std::string> nonempty;
        for (auto& l : lines) {
            if (!trim(l).empty()) nonempty.push_back(l);
        }
        std::reverse(nonempty.begin(), nonempty.end());
        std::ofstream out(tmp.path / name);
        for (const auto& l : nonempty) out << l << "\n";
    }
    Questionnaire a = load_dataset(sample_dataset());
    Questionnaire b = load_dataset(tmp.path);
    CHECK(a == b);
    Questionnaire c = load_dataset(sample_dataset());
    CHECK(a == c);
}

TEST_CASE("round trip: save then reload yields an equal questionnaire") {
    Questionnaire q = load_dataset(sample_dataset());
    TempDir tmp("roundtrip");
    save_dataset(q, tmp.path);
    CHECK(load_dataset(tmp.path) == q);
}

TEST_CASE("empty answers file loads without error") {
    TempDir tmp("empty_answers");
    std::filesystem::copy(sample_dataset() / "statements.jsonl", tmp.path / "statements.jsonl");
    std::filesystem::copy(sample_dataset() / "parties.jsonl", tmp.path / "parties.jsonl");
    std::ofstream(tmp.path / "answers.jsonl").close();
    Questionnaire q = load_dataset(tmp.path);
    CHECK(q.statements.size() == 30);
    CHECK(q.answers.empty());
}

TEST_CASE("missing file names the file") {
    TempDir tmp("missing");
    std::filesystem::copy(sample_dataset() / "statements.jsonl", tmp.path / "statements.jsonl");
    std::filesystem::copy(sample_dataset() / "parties.jsonl", tmp.path / "parties.jsonl");
    CHECK_THROWS_WITH_AS(load_dataset(tmp.path), doctest::Contains("answers.jsonl"), DatasetError);
}

TEST_CASE("dangling references are all reported, not just the first") {
    TempDir tmp("dangling");
    std::filesystem::copy(sample_dataset() / "statements.jsonl", tmp.path / "statements.jsonl");
    std::filesystem::copy(sample_dataset() / "parties.jsonl", tmp.path / "parties.jsonl");
    {
        std::ofstream out(tmp.path / "answers.jsonl");
        out << R"({"party":"cdu","statement_id":31,"answer_letter":"a"})" << "\n";
        out << R"({"party":"ghost","statement_id":1,"answer_letter":"b"})" << "\n";
    }
    try {
        load_dataset(tmp.path);
        FAIL("expected DatasetError");
    } catch (const DatasetError& e) {
        std::string msg = e.what();
        CHECK(msg.find("statement 31") != std::string::npos);
        CHECK(msg.find("ghost") != std::string::npos);
    }
}

TEST_CASE("validate_dataset reports count mismatch and duplicates") {
    Questionnaire q = load_dataset(sample_dataset());
    CHECK(validate_dataset(q, 30).empty());

    auto issues = validate_dataset(q, 31);
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].code == "statement-count-mismatch");

    Questionnaire dup = q;
    dup.answers.push_back(dup.answers.front());
    std::sort(dup.answers.begin(), dup.answers.end(),
              [](const PartyAnswer& a, const PartyAnswer& b) {
                  if (a.party != b.party) return a.party < b.party;
                  return a.statement_id < b.statement_id;
              });
    bool found = false;
    for (const auto& issue : validate_dataset(dup)) found |= issue.code == "duplicate-answer";
    CHECK(found);
}

TEST_CASE("unknown country code is an issue, not a crash") {
    Questionnaire q;
    q.statements = {Statement{1, "text", std::nullopt}};
    q.parties = {make_party("x", "X Party", "Xish", "XX")};
    auto issues = validate_dataset(q);
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].code == "unknown-country-code");
}

TEST_CASE("euro-parties must affiliate with themselves") {
    Questionnaire q;
    q.statements = {Statement{1, "text", std::nullopt}};
    q.parties = {make_party("badeuro", "Bad Euro Party", "European", "EU", "epp", "EPP"),
                 make_party("epp", "People's Party (EPP)", "European", "EU", "epp", "EPP")};
    bool found = false;
    for (const auto& issue : validate_dataset(q)) {
        found |= issue.code == "euro-party-self-affiliation";
    }
    CHECK(found);
}

TEST_CASE("party construction rejects empty fields") {
    CHECK_THROWS_AS(make_party("x", "X Party", "", "DE"), std::invalid_argument);
    CHECK_THROWS_AS(make_party("x", "", "German", "DE"), std::invalid_argument);
    CHECK_THROWS_AS(make_party("", "X Party", "German", "DE"), std::invalid_argument);
}

TEST_CASE("missing translation is flagged when the original is present") {
    Questionnaire q;
    q.statements = {Statement{1, "text", std::nullopt}};
    q.parties = {make_party("x", "X Party", "Xish", "DE")};
    PartyAnswer a;
    a.party = "x";
    a.statement_id = 1;
    a.answer = *likert_option_from_letter('d');
    a.justification_original = "Wir stimmen zu.";
    a.justification_language = "de";
    q.answers = {a};
    bool found = false;
    for (const auto& issue : validate_dataset(q)) found |= issue.code == "missing-translation";
    CHECK(found);
}

TEST_CASE("exactly one answer per (party, statement) pair in the sample data") {
    Questionnaire q = load_dataset(sample_dataset());
    std::set<std::pair<std::string, int>> seen;
    for (const auto& a : q.answers) {
        CHECK(seen.insert({a.party, a.statement_id}).second);
    }
}

TEST_CASE("canonical likert options are the five ordered labels") {
    const auto& opts = canonical_likert_options();
    REQUIRE(opts.size() == 5);
    CHECK(opts.front().letter == 'a');
    CHECK(opts.front().label == "Completely disagree");
    CHECK(opts.back().letter == 'e');
    CHECK(opts.back().label == "Completely agree");
    CHECK(likert_option_from_letter('D')->label == "Tend to agree");
    CHECK(!likert_option_from_letter('f').has_value());
}

TEST_CASE("language codes map to prompt language names") {
    CHECK(language_name_from_code("de") == "German");
    CHECK(language_name_from_code("ES") == "Spanish");
    CHECK(language_name_from_code("xx") == "xx");
}
