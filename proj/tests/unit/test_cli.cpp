#include <doctest.h>

#include <sstream>

#include "aiq/api_server.hpp"
#include "aiq/cli.hpp"
#include "aiq/reporting.hpp"
#include "graded_fixture.hpp"

using namespace aiq;
using namespace aiq::testing;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(const std::vector<std::string>& args, const std::string& input = "", Clock* clock = nullptr) {
  std::istringstream in(input);
  std::ostringstream out, err;
  const int code = cli_dispatch(args, {in, out, err, clock});
  return {code, out.str(), err.str()};
}

std::string copy_fixture(const TempDir& dir, const std::string& name) {
  const auto target = dir / name;
  std::filesystem::copy(fixtures_dir() / name, target, std::filesystem::copy_options::recursive);
  return target.string();
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("grade classify prints the grade and gaps") {
    const Run r = cli({"grade", "classify", (profiles_dir() / "alphago.json").string()});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("grade: 3\n", 0) == 0);
    CHECK(r.out.find("sharing") != std::string::npos);

    const Run j = cli({"grade", "classify", (profiles_dir() / "human.json").string(), "--json"});
    CHECK(j.code == 0);
    CHECK(Json::parse(j.out)["grade"] == 5);
  }

  TEST_CASE("battery validate reports schema violations with exit 1") {
    TempDir dir;
    Json j = to_json(simple_battery(1));
    j["weights"]["a"] = 0.45;
    write_file(dir / "bad-weights.json", j.dump());
    const Run bad = cli({"battery", "validate", (dir / "bad-weights.json").string()});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("SchemaViolation(weights)") != std::string::npos);
    CHECK(bad.err.find("sum 1.2 ≠ 1.0") != std::string::npos);

    const Run good = cli({"battery", "validate", reference_battery_path().string()});
    CHECK(good.code == 0);
    CHECK(good.out == "valid: reference-battery-v1 1.0.0 (15 subtests, 45 items)\n");

    write_file(dir / "empty.json", "");
    CHECK(cli({"battery", "validate", (dir / "empty.json").string()}).code == 1);
  }

  TEST_CASE("usage errors exit 2") {
    CHECK(cli({}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);
    CHECK(cli({"grade", "classify"}).code == 2);
    CHECK(cli({"report", "rank", "--format", "pdf"}).code == 2);
    CHECK(cli({"--help"}).code == 0);
  }

  TEST_CASE("report rank over the Table 2 fixture gives the printed order") {
    TempDir dir;
    const std::string store = copy_fixture(dir, "table2");
    const Run r = cli({"report", "rank", "--store", store, "--format", "csv"});
    REQUIRE(r.code == 0);
    std::vector<std::string> order;
    std::istringstream lines(r.out);
    std::string line;
    std::getline(lines, line);
    while (std::getline(lines, line)) {
      const auto a = line.find(',');
      order.push_back(line.substr(a + 1, line.find(',', a + 1) - a - 1));
    }
    CHECK(order == std::vector<std::string>{"human18", "human12", "human6", "google", "duer", "baidu", "sogou", "bing",
                                            "xiaobing", "siri"});
    const Run text = cli({"report", "rank", "--store", store});
    CHECK(text.out.find("Absolute IQ") != std::string::npos);
    const Run exported = cli({"report", "rank", "--store", store, "--csv", (dir / "rank.csv").string()});
    CHECK(exported.code == 0);
    CHECK(read_text_file(dir / "rank.csv") == r.out);
  }

  TEST_CASE("subjects, sessions and manual scores through the CLI") {
    TempDir dir;
    const std::string store = (dir / "store").string();
    SteppingClock clock(epoch_2016());
    CHECK(cli({"subject", "add", "--store", store, "--id", "bot", "--name", "Bot"}).code == 0);
    CHECK(cli({"subject", "add", "--store", store, "--id", "bot", "--name", "Bot"}).code == 1);
    CHECK(cli({"subject", "add", "--store", store, "--id", "x", "--name", "X", "--category", "Alien"}).code == 2);
    CHECK(cli({"subject", "list", "--store", store}).out == "bot\tBot\tArtificialSystem\n");

    Battery b = simple_battery(1);
    b.subtests[3].items.push_back(rubric_item("h1", "poem", 2.0));
    b.subtests[3].max_points += 2.0;
    save_battery(b, dir / "battery.json");
    write_file(dir / "adapter.json",
               Json{{"kind", "Subprocess"}, {"command", stub_path()}, {"args", {"--echo"}}}.dump());

    const Run started = cli({"session", "start", "--store", store, "--battery", (dir / "battery.json").string(),
                             "--subject", "bot", "--adapter", (dir / "adapter.json").string()},
                            "", &clock);
    REQUIRE(started.code == 0);
    const std::string id = started.out.substr(0, started.out.find('\n'));
    CHECK(id == "bot-20160201T000000000Z");

    const Run ran = cli({"session", "run", "--store", store, id}, "", &clock);
    CHECK(ran.code == 0);
    CHECK(ran.out.find("AwaitingGrades") != std::string::npos);

    CHECK(cli({"score", "set", "--store", store, id, "--item", "h1", "--points", "7", "--grader", "g"}).code == 1);
    CHECK(cli({"score", "set", "--store", store, id, "--item", "h1", "--points", "2", "--grader", "g"}, "", &clock).out ==
          "status: Complete\n");

    const Run shown = cli({"session", "show", "--store", store, id});
    CHECK(shown.code == 0);
    CHECK(shown.out.find("Q: ") != std::string::npos);
    const Run as_json = cli({"session", "show", "--store", store, id, "--json"});
    CHECK(as_json.out == read_text_file(dir / "store" / "sessions" / (id + ".json")));

    CHECK(cli({"session", "show", "--store", store, "nope"}).code == 1);
    CHECK(cli({"session", "abort", "--store", store, id}).code == 1);  // already complete

    const Run results = cli({"report", "results", "--store", store});
    CHECK(results.out.rfind("subject_id,Q,f_I,f_O,f_S,f_C,computed_at\r\n", 0) == 0);
    CHECK(results.out.find("bot,") != std::string::npos);
  }

  TEST_CASE("interactive grading loop") {
    GradingFixture fx;
    SteppingClock clock(epoch_2016());
    const Run r = cli({"score", "interactive", "--store", fx.root.string(), fx.session_id, "--grader", "g"},
                      "9\nabc\n3\n\n", &clock);
    CHECK(r.code == 0);
    CHECK(r.err.find("OutOfRange") != std::string::npos);
    CHECK(r.err.find("not a number") != std::string::npos);
    const Session s = fx.store.load_session(fx.session_id);
    CHECK(s.item_scores.at("h1").points == 3.0);
    CHECK_FALSE(s.item_scores.contains("h2"));
    CHECK(s.status == SessionStatus::AwaitingGrades);
  }

  TEST_CASE("report trend from a series file") {
    TempDir dir;
    const Json series = {{"human", {{{"t", "2014-01-01T00:00:00Z"}, {"Q", 97}}, {{"t", "2017-01-01T00:00:00Z"}, {"Q", 97}}}},
                         {"bot",
                          {{{"t", "2014-01-01T00:00:00Z"}, {"Q", 20}},
                           {{"t", "2015-01-01T00:00:00Z"}, {"Q", 43}},
                           {{"t", "2016-01-01T00:00:00Z"}, {"Q", 67}},
                           {{"t", "2017-01-01T00:00:00Z"}, {"Q", 90}}}}};
    write_file(dir / "series.json", series.dump());
    const std::string store = (dir / "store").string();
    const Run r = cli({"report", "trend", "--store", store, "--baseline", "human", "--series",
                       (dir / "series.json").string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("bot: scenario A") != std::string::npos);
    CHECK(r.out.find("human: scenario B") != std::string::npos);
    CHECK(cli({"report", "trend", "--store", store, "--baseline", "nobody", "--series",
               (dir / "series.json").string()})
              .code == 1);
  }

  TEST_CASE("HTTP and CLI grading produce byte-identical session files") {
    GradingFixture fx;
    const auto cli_root = fx.clone("via-cli");
    const std::vector<std::pair<std::string, double>> grades = {{"h2", 3.5}, {"h1", 1.0}, {"h3", 2.0}};

    {
      SteppingClock clock(epoch_2016() + std::chrono::hours{2});
      ApiServer server(fx.store, clock);
      const int port = server.bind("127.0.0.1", 0);
      server.start();
      httplib::Client client("127.0.0.1", port);
      for (const auto& [item, points] : grades) {
        const Json body = {{"item_id", item}, {"points", points}, {"grader_id", "grader-7"}};
        auto res = client.Post("/api/sessions/" + fx.session_id + "/scores", body.dump(), "application/json");
        REQUIRE(res);
        REQUIRE(res->status == 200);
      }
    }
    {
      SteppingClock clock(epoch_2016() + std::chrono::hours{2});
      for (const auto& [item, points] : grades) {
        const Run r = cli({"score", "set", "--store", cli_root.string(), fx.session_id, "--item", item, "--points",
                           format_number(points), "--grader", "grader-7"},
                          "", &clock);
        REQUIRE(r.code == 0);
      }
    }
    const std::string via_http = read_text_file(fx.store.session_path(fx.session_id));
    const std::string via_cli = read_text_file(cli_root / "sessions" / (fx.session_id + ".json"));
    CHECK(via_http == via_cli);
    CHECK(read_text_file(fx.root / "index.json") == read_text_file(cli_root / "index.json"));
    CHECK(load_session(fx.store.session_path(fx.session_id)).status == SessionStatus::Complete);
  }

  TEST_CASE("the installed binary runs end to end") {
    const std::string cmd = cli_path() + " grade classify " + (profiles_dir() / "stone.json").string() + " > /dev/null";
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(WEXITSTATUS(std::system((cli_path() + " nonsense 2> /dev/null").c_str())) == 2);
  }
}
