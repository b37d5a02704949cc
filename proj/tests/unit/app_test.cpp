#include <httplib.h>

#include <chrono>
#include <fstream>
#include <thread>

#include <gtest/gtest.h>

#include "tunegrid/app/config.hpp"
#include "tunegrid/app/server_stack.hpp"
#include "tunegrid/app/simulate.hpp"
#include "tunegrid/error.hpp"
#include "tunegrid/proto/worker_agent.hpp"

namespace {

using namespace tunegrid;
using namespace std::chrono_literals;
using nlohmann::json;

ErrorCode config_error(const json& doc) {
  try {
    app::parse_config(doc);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "accepted " << doc.dump();
  return ErrorCode::kIo;
}

app::SimulateOptions scaled(std::size_t workers, std::uint64_t seed = 1) {
  app::SimulateOptions o;
  o.workers = workers;
  o.seed = seed;
  o.jobs.target_events = 20000;
  o.jobs.chunk_events = 2000;
  return o;
}

TEST(Config, EmptyDocumentGivesDefaults) {
  const auto c = app::parse_config(json::object());
  EXPECT_EQ(c.model, gen::GeneratorModel::default_model());
  EXPECT_EQ(c.truth, app::default_truth());
  EXPECT_EQ(c.jobs.target_events, 100000u);
  EXPECT_EQ(c.jobs.chunk_events, 10000u);
  EXPECT_EQ(c.http.str(), "127.0.0.1:8080");
  EXPECT_EQ(c.workers.str(), "127.0.0.1:7700");
}

TEST(Config, ShippedDefaultFileLoads) {
  const auto c = app::load_config(std::filesystem::path(TUNEGRID_SOURCE_DIR) / "config/default.json");
  EXPECT_EQ(c.truth, app::default_truth());
  EXPECT_EQ(c.model.space().dims().size(), 4u);
  EXPECT_FALSE(c.teams.empty());
}

TEST(Config, BadBoundsAreRejected) {
  json doc = {{"model",
               {{"space", {{{"name", "a"}, {"min", 3.0}, {"max", 3.0}}, {{"name", "b"}, {"min", 0.0}, {"max", 1.0}}}},
                {"observables", {{{"id", "o"}, {"shape_param", 0}, {"flat_param", 1}, {"edges", {0.0, 0.5, 1.0}}}}}}},
              {"truth", {3.0, 0.5}}};
  EXPECT_EQ(config_error(doc), ErrorCode::kConfig);
  doc["model"]["space"][0]["min"] = 4.0;
  EXPECT_EQ(config_error(doc), ErrorCode::kConfig);
  doc["model"]["space"][0]["min"] = 1.0;
  EXPECT_NO_THROW(app::parse_config(doc));
}

TEST(Config, RejectsMalformedSettings) {
  EXPECT_EQ(config_error({{"truth", {9.0, 0.5, 3.0, 0.25}}}), ErrorCode::kConfig);
  EXPECT_EQ(config_error({{"jobs", {{"chunk_events", 0}}}}), ErrorCode::kConfig);
  EXPECT_EQ(config_error({{"jobs", {{"chunk_size", 10}}}}), ErrorCode::kConfig);
  EXPECT_EQ(config_error({{"jobs", {{"target_events", "many"}}}}), ErrorCode::kConfig);
  EXPECT_EQ(config_error({{"listen", {{"http", "localhost"}}}}), ErrorCode::kConfig);
  EXPECT_EQ(config_error({{"listen", {{"http", "localhost:99999"}}}}), ErrorCode::kConfig);
  EXPECT_EQ(config_error({{"colour", "blue"}}), ErrorCode::kConfig);
  EXPECT_EQ(config_error(json::array()), ErrorCode::kConfig);
}

TEST(Config, MissingOrBrokenFile) {
  EXPECT_THROW(app::load_config("/nonexistent/tunegrid.json"), Error);
  const auto path = std::filesystem::temp_directory_path() / "tunegrid_broken_config.json";
  std::ofstream(path) << "{\"jobs\": ";
  try {
    app::load_config(path);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
  }
  std::filesystem::remove(path);
}

TEST(Config, RelativePathsFollowTheConfigFile) {
  const auto c = app::parse_config({{"registry", {{"store", "state/reg.json"}}}, {"ui", {{"static_dir", "/srv/ui"}}}},
                                   "/etc/tunegrid");
  EXPECT_EQ(c.registry_store, std::filesystem::path("/etc/tunegrid/state/reg.json"));
  EXPECT_EQ(c.static_dir, std::filesystem::path("/srv/ui"));
}

TEST(Simulate, NoWorkersFlagsStarvation) {
  const auto r = app::simulate(scaled(0));
  EXPECT_TRUE(r.starved);
  ASSERT_EQ(r.jobs.size(), 1u);
  EXPECT_EQ(r.jobs[0].state, jobs::JobState::kQueued);
  EXPECT_EQ(r.completed(), 0u);
  EXPECT_NE(app::format_table(r).find("STARVED"), std::string::npos);
}

TEST(Simulate, BudgetBoundsTheRun) {
  const auto r = app::simulate(scaled(8));
  EXPECT_FALSE(r.starved);
  EXPECT_LE(r.completed(), 30u);
  EXPECT_EQ(r.jobs.size(), 30u);
  for (const auto& j : r.jobs) {
    EXPECT_EQ(j.state, jobs::JobState::kCompleted) << j.job_id;
    EXPECT_GE(j.merged_events, 20000u);
    EXPECT_GE(j.interims, 10u);
  }
  auto small = scaled(8);
  small.budget = 5;
  EXPECT_EQ(app::simulate(small).jobs.size(), 5u);
}

TEST(Simulate, BestNeverWorseThanFirst) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto r = app::simulate(scaled(8, seed));
    ASSERT_TRUE(r.best);
    EXPECT_LE(r.jobs[*r.best].fit->reduced, r.jobs[0].fit->reduced);
    for (std::size_t i = 1; i < r.series.size(); ++i) EXPECT_LE(r.series[i].best, r.series[i - 1].best);
  }
}

TEST(Simulate, ScanVisitsTheCenterThenOneDimAtATime) {
  const auto r = app::simulate(scaled(8));
  EXPECT_EQ(r.jobs[0].params, (tune::TuneParameters{{2.75, 0.5, 2.75, 0.5}}));
  // First batch varies a1 over the grid, other dims at the center.
  for (std::size_t i = 1; i <= 4; ++i) {
    EXPECT_EQ(r.jobs[i].params.values[1], 0.5);
    EXPECT_EQ(r.jobs[i].params.values[2], 2.75);
    EXPECT_NE(r.jobs[i].params.values[0], 2.75);
  }
  // Later jobs get interpolated estimates; the very first sees an empty cache.
  EXPECT_FALSE(r.jobs[0].estimate_quality);
  EXPECT_TRUE(r.jobs.back().estimate_quality);
  for (const auto& j : r.jobs) EXPECT_TRUE(j.estimate_first);
}

TEST(Simulate, DeterministicPerSeed) {
  const auto a = app::simulate(scaled(8, 7));
  const auto b = app::simulate(scaled(8, 7));
  EXPECT_TRUE(app::same_run(a, b));
  EXPECT_EQ(a.credits.player_points, b.credits.player_points);
  EXPECT_EQ(a.credits.donor_points, b.credits.donor_points);
  const auto c = app::simulate(scaled(8, 8));
  EXPECT_FALSE(app::same_run(a, c));
}

TEST(Simulate, ChurnAndUnevenSpeedsStillFinish) {
  auto o = scaled(6, 4);
  o.churn = 0.05;
  o.speed_spread = 3.0;
  o.budget = 12;
  const auto r = app::simulate(o);
  EXPECT_GT(r.reconnects, 0u);
  EXPECT_EQ(r.completed(), 12u);
  EXPECT_TRUE(app::same_run(r, app::simulate(o)));
}

TEST(Simulate, ReportDocument) {
  auto o = scaled(4);
  o.budget = 6;
  const auto r = app::simulate(o);
  const auto j = app::to_json(r);
  EXPECT_EQ(j["jobs"].size(), 6u);
  EXPECT_EQ(j["options"]["workers"], 4);
  EXPECT_EQ(j["series"].size(), 6u);
  EXPECT_EQ(j["best"]["job_id"], r.jobs[*r.best].job_id);
  EXPECT_TRUE(j["credits"]["players"].is_array());
  EXPECT_EQ(j["events_total"], r.events_total);
  EXPECT_THROW(app::simulate([] {
                 auto bad = scaled(1);
                 bad.strategy = "random";
                 return bad;
               }()),
               Error);
}

TEST(ServerStack, WorkerAndPlayerMeetOverTheNetwork) {
  auto config = app::parse_config({{"jobs", {{"target_events", 20000}, {"chunk_events", 4000}}},
                                   {"listen", {{"http", "127.0.0.1:0"}, {"workers", "127.0.0.1:0"}}}});
  app::ServerStack stack(config);
  httplib::Client http("127.0.0.1", stack.http_endpoint().port);

  auto post = [&](const std::string& path, const json& body) {
    auto res = http.Post(path, body.dump(), "application/json");
    EXPECT_TRUE(res);
    return json::parse(res->body);
  };
  const auto app_doc = post("/api/apps", {{"user", "olga"}, {"name", "toy"}});
  const auto group = post("/api/groups", {{"user", "olga"}});
  const std::string g = "/api/groups/" + group["group_id"].get<std::string>();
  post(g + "/attach", {{"user", "olga"}, {"app_id", app_doc["app_id"]}, {"team_id", "T-7"}, {"team_alias", "crew"}});
  const auto ctx = post(g + "/launch", {{"user", "olga"}, {"team_alias", "crew"}}).get<registry::LaunchContext>();
  EXPECT_EQ(ctx.manager_endpoint, stack.worker_endpoint().str());

  const auto ep = app::parse_endpoint(ctx.manager_endpoint);
  proto::AgentOptions o;
  o.worker_id = ctx.worker_id;
  o.team_id = ctx.team_id;
  o.owner = ctx.owner;
  proto::WorkerAgent agent(proto::tcp_connect(ep.host, static_cast<std::uint16_t>(ep.port)), o);
  std::thread t([&] { agent.run(); });
  for (int i = 0; i < 3000 && stack.loop().snapshot()->workers.empty(); ++i) std::this_thread::sleep_for(1ms);

  const auto r = post("/api/jobs", {{"player", "pat"}, {"team", "T-7"}, {"params", {2.0, 0.5, 3.0, 0.25}}});
  const std::string job = r["job_id"];
  json view;
  for (int i = 0; i < 5000; ++i) {
    view = json::parse(http.Get("/api/jobs/" + job)->body);
    if (view["state"] == "COMPLETED") break;
    std::this_thread::sleep_for(2ms);
  }
  EXPECT_EQ(view["state"], "COMPLETED");
  const auto board = json::parse(http.Get("/api/leaderboard")->body);
  EXPECT_EQ(board["donors"][0]["owner"], "olga");
  agent.stop();
  t.join();
  stack.stop();
}

TEST(ServerStack, RegistryStoreSurvivesRestart) {
  const auto dir = std::filesystem::temp_directory_path() / "tunegrid_stack_store";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  auto config = app::parse_config({{"listen", {{"http", "127.0.0.1:0"}, {"workers", "127.0.0.1:0"}}},
                                   {"registry", {{"store", "reg.json"}}}},
                                  dir);
  {
    app::ServerStack stack(config);
    const auto id = stack.registry().register_app("olga", "toy", "", "");
    const auto group = stack.registry().create_group("olga");
    stack.registry().attach_app("olga", group, id, "T-9", "crew");
  }
  app::ServerStack again(config);
  EXPECT_EQ(again.registry().snapshot()->apps.size(), 1u);
  // Teams attached before the restart are open for tunes again.
  EXPECT_NO_THROW(again.service().submit({{"player", "p"}, {"team", "T-9"}, {"params", {2.0, 0.5, 3.0, 0.25}}}));
  again.stop();
  std::filesystem::remove_all(dir);
}

}  // namespace
