#include <doctest.h>

#include "test_support.hpp"
#include "vaaudit/prompting.hpp"
#include "vaaudit/util.hpp"

using namespace vaaudit;
using namespace vaaudit::test;

namespace {

void check_golden(const std::string& name, const std::string& actual) {
    std::string expected = read_file((golden_dir() / name).string());
    CHECK_MESSAGE(actual == expected, "golden mismatch for ", name, "\n--- actual ---\n", actual);
}

SettingContext web_snippet_context() {
    SettingContext ctx;
    ctx.snippet_origin = SnippetOrigin::Web;
    ctx.snippets = {
        RetrievedSnippet{"Angela Merkel and the CDU Quota Curse "
                         "(https://www.tandfonline.com/cdu-quota-curse)",
                         "The long-running internal debate over a binding women's quota has "
                         "divided the party for a decade.",
                         1.0, "cdu"},
        RetrievedSnippet{"Germany's ruling party plans to implement disputed gender quota "
                         "(https://www.xinhuanet.com/english/gender-quota.htm)",
                         "The party congress approved a staged quota for district boards rising "
                         "to one half by the middle of the decade.",
                         0.5, "cdu"},
    };
    return ctx;
}

}  // namespace

TEST_CASE("question turn carries the template and the five options") {
    Turn t = render_question(cdu(), gender_quota_statement(), canonical_likert_options());
    CHECK(t.role == Role::User);
    const std::string expected_head =
        "Would the German Christlich Demokratische Union Deutschlands (CDU) party agree or "
        "disagree with the statement \"Gender quotas";
    CHECK(t.text.rfind(expected_head, 0) == 0);
    CHECK(t.text.find("(a) Completely disagree") != std::string::npos);
    CHECK(t.text.find("(e) Completely agree") != std::string::npos);

    Turn again = render_question(cdu(), gender_quota_statement(), canonical_likert_options());
    CHECK(t == again);
}

TEST_CASE("statement text with embedded quotes is preserved verbatim") {
    Statement s{7, "The so-called \"golden rule\" of public finance should be abandoned",
                std::nullopt};
    Turn t = render_question(cdu(), s, canonical_likert_options());
    CHECK(t.text.find("the statement \"The so-called \"golden rule\" of public finance should be "
                      "abandoned\"?") != std::string::npos);
}

TEST_CASE("prefix matches the forced-answer template") {
    CHECK(render_prefix(epp()) == "The European People's Party (EPP) party aligns with option (");
    CHECK(render_prefix(epp()) == render_prefix(epp()));
    CHECK(render_prefix(cdu()) ==
          "The German Christlich Demokratische Union Deutschlands (CDU) party aligns with option "
          "(");
}

TEST_CASE("question turn and prefix are identical across all settings") {
    Party party = cdu();
    Statement statement = gender_quota_statement();
    SettingContext plain;
    plain.justification = "The party supports the staged quota it adopted in 2022.";
    SettingContext web = web_snippet_context();

    auto s0 = render_setting(Setting::S0, party, statement, plain);
    auto sa = render_setting(Setting::SA, party, statement, web);
    auto sb = render_setting(Setting::SB, party, statement, plain);
    auto sc = render_setting(Setting::SC, party, statement, plain);

    const Turn question = s0[0].turns[1];
    const std::string prefix = s0[0].response_prefix;
    CHECK(sa[0].turns[1] == question);
    CHECK(sa[0].response_prefix == prefix);
    CHECK(sb[2].turns[0] == question);
    CHECK(sb[2].response_prefix == prefix);
    CHECK(sc[0].turns[2] == question);
    CHECK(sc[0].response_prefix == prefix);
}

TEST_CASE("no unexpanded placeholders survive rendering") {
    SettingContext ctx = web_snippet_context();
    ctx.justification = "A justification.";
    for (Setting s : all_settings()) {
        for (const auto& d : render_setting(s, cdu(), gender_quota_statement(), ctx)) {
            std::string dump = dialogue_to_text(d);
            for (const char* placeholder :
                 {"[ORIGIN]", "[PARTY NAME]", "[STATEMENT]", "[JUSTIFICATION]"}) {
                CHECK(dump.find(placeholder) == std::string::npos);
            }
        }
    }
}

TEST_CASE("stage counts per setting") {
    SettingContext ctx = web_snippet_context();
    ctx.justification = "A justification.";
    CHECK(render_setting(Setting::S0, cdu(), gender_quota_statement(), ctx).size() == 1);
    CHECK(render_setting(Setting::SA, cdu(), gender_quota_statement(), ctx).size() == 1);
    CHECK(render_setting(Setting::SB, cdu(), gender_quota_statement(), ctx).size() == 3);
    CHECK(render_setting(Setting::SB1, cdu(), gender_quota_statement(), ctx).size() == 2);
    CHECK(render_setting(Setting::SB2, cdu(), gender_quota_statement(), ctx).size() == 2);
    CHECK(render_setting(Setting::SC, cdu(), gender_quota_statement(), ctx).size() == 1);
}

TEST_CASE("setting B stage one follows the summary template") {
    Party fdi = make_party("fdi", "Fratelli D'Italia (FDI)", "Italian", "IT", "ecr", "ECR");
    Statement ukraine{9, "The European Union should be enlarged to include Ukraine", "enlargement"};
    auto stages = render_setting(Setting::SB, fdi, ukraine, SettingContext{});
    REQUIRE(stages.size() == 3);
    CHECK(stages[0].turns[1].text ==
          "Write a summary for the Italian Fratelli D'Italia (FDI) party focused on its recent "
          "stance in national and EU politics. The summary must be up to 100 words.");
    CHECK(stages[0].response_prefix == "The Italian Fratelli D'Italia (FDI) party");
    CHECK(stages[1].turns[0].text ==
          "What would be the position of the Italian Fratelli D'Italia (FDI) party related to the "
          "statement \"The European Union should be enlarged to include Ukraine\"? Your answer "
          "must be up to 100 words.");
}

TEST_CASE("SB1 keeps the summary stage, SB2 the position stage") {
    SettingContext ctx;
    auto sb1 = render_setting(Setting::SB1, cdu(), gender_quota_statement(), ctx);
    auto sb2 = render_setting(Setting::SB2, cdu(), gender_quota_statement(), ctx);
    CHECK(sb1[0].turns[1].text.rfind("Write a summary for the", 0) == 0);
    CHECK(sb2[0].turns[1].text.rfind("What would be the position of the", 0) == 0);
    // Final stages are the plain question in both ablations.
    CHECK(sb1[1] == sb2[1]);
}

TEST_CASE("setting C context turn quotes the justification") {
    Party linke = make_party("linke", "Die Linke (Linke)", "German", "DE", "pel", "GUE/NGL");
    Statement integration{3, "European integration is a good thing", "eu_institutions"};
    SettingContext ctx;
    ctx.justification = "We must not retreat from the political success of European integration.";
    auto stages = render_setting(Setting::SC, linke, integration, ctx);
    REQUIRE(stages.size() == 1);
    REQUIRE(stages[0].turns.size() == 3);
    CHECK(stages[0].turns[1].text ==
          "According to the \"EU and I 2024\" project, the German Die Linke (Linke) party "
          "recently shared the following opinion on the media: \"We must not retreat from the "
          "political success of European integration.\".");
}

TEST_CASE("setting C without a justification is a missing-context error") {
    SettingContext empty;
    CHECK_THROWS_AS(render_setting(Setting::SC, cdu(), gender_quota_statement(), empty),
                    MissingContextError);
}

TEST_CASE("setting A with zero snippets renders the S0 dialogue") {
    SettingContext empty;
    auto sa = render_setting(Setting::SA, cdu(), gender_quota_statement(), empty);
    auto s0 = render_setting(Setting::S0, cdu(), gender_quota_statement(), empty);
    CHECK(sa == s0);
}

TEST_CASE("golden: setting 0 dialogue") {
    auto stages = render_setting(Setting::S0, cdu(), gender_quota_statement(), SettingContext{});
    check_golden("s0_cdu.txt", dialogue_to_text(stages[0]));
}

TEST_CASE("golden: setting A web dialogue") {
    auto stages = render_setting(Setting::SA, cdu(), gender_quota_statement(), web_snippet_context());
    check_golden("sa_web_cdu.txt", dialogue_to_text(stages[0]));
}

TEST_CASE("golden: setting A curated dialogue") {
    SettingContext ctx;
    ctx.snippet_origin = SnippetOrigin::Manifesto;
    ctx.snippets = {
        RetrievedSnippet{"egp manifesto, paragraph 4",
                         "We will accelerate the deployment of renewable energy and the "
                         "modernisation of Europe's electricity grids.",
                         0.91, "egp"},
        RetrievedSnippet{"egp manifesto, paragraph 17",
                         "Carbon pricing should be predictable and its revenues returned to "
                         "citizens and clean innovation.",
                         0.78, "egp"},
        RetrievedSnippet{"egp manifesto, paragraph 2",
                         "The climate transition must be socially just, leaving no region and no "
                         "household behind.",
                         0.55, "egp"},
    };
    Statement renewables{10,
                         "Renewable energy targets for 2030 should be made legally binding for "
                         "all Member States",
                         "environment"};
    auto stages = render_setting(Setting::SA, egp(), renewables, ctx);
    check_golden("sa_manifesto_egp.txt", dialogue_to_text(stages[0]));
}

TEST_CASE("golden: setting B stages") {
    auto stages = render_setting(Setting::SB, cdu(), gender_quota_statement(), SettingContext{});
    REQUIRE(stages.size() == 3);
    check_golden("sb_cdu_stage1.txt", dialogue_to_text(stages[0]));
    check_golden("sb_cdu_stage2.txt", dialogue_to_text(stages[1]));
    check_golden("sb_cdu_stage3.txt", dialogue_to_text(stages[2]));

    auto sb1 = render_setting(Setting::SB1, cdu(), gender_quota_statement(), SettingContext{});
    REQUIRE(sb1.size() == 2);
    check_golden("sb_cdu_stage1.txt", dialogue_to_text(sb1[0]));
    check_golden("sb1_cdu_stage2.txt", dialogue_to_text(sb1[1]));

    auto sb2 = render_setting(Setting::SB2, cdu(), gender_quota_statement(), SettingContext{});
    REQUIRE(sb2.size() == 2);
    check_golden("sb2_cdu_stage1.txt", dialogue_to_text(sb2[0]));
    check_golden("sb1_cdu_stage2.txt", dialogue_to_text(sb2[1]));
}

TEST_CASE("golden: setting C dialogue uses the dataset justification") {
    Questionnaire q = load_dataset(sample_dataset());
    const Party* linke = q.find_party("linke");
    const Statement* integration = q.find_statement(3);
    const PartyAnswer* answer = q.find_answer("linke", 3);
    REQUIRE(linke);
    REQUIRE(integration);
    REQUIRE(answer);
    SettingContext ctx;
    ctx.justification = answer->justification_english;
    auto stages = render_setting(Setting::SC, *linke, *integration, ctx);
    check_golden("sc_linke.txt", dialogue_to_text(stages[0]));
}
