#include <httplib.h>

#include <chrono>
#include <thread>

#include <gtest/gtest.h>

#include "tunegrid/proto/gateway.hpp"
#include "tunegrid/proto/worker_agent.hpp"
#include "tunegrid/service/api_json.hpp"
#include "tunegrid/service/http_server.hpp"

namespace {

using namespace tunegrid;
using namespace std::chrono_literals;
using nlohmann::json;

const gen::GeneratorModel& model() {
  static const auto m = gen::GeneratorModel::default_model();
  return m;
}

const tune::TuneParameters kTruth{{1.625, 0.5, 3.875, 0.25}};

// Manager, registry, service and HTTP front end; workers join over in-process connections.
struct Rig {
  explicit Rig(jobs::ManagerConfig config = {})
      : loop(jobs::JobManager(model(), kTruth, config)),
        service(loop, registry, model(), gen::expected_reference(model(), kTruth)),
        http(service),
        gateway(loop, {model()}) {
    port = http.bind("127.0.0.1", 0);
    http.start();
  }

  ~Rig() {
    for (auto& a : agents) a->stop();
    for (auto& t : threads) t.join();
    gateway.shutdown();
    http.stop();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(20s);
    return c;
  }

  json get(const std::string& path, int expect = 200) const {
    auto res = client().Get(path);
    EXPECT_TRUE(res) << path;
    if (!res) return nullptr;
    EXPECT_EQ(res->status, expect) << path << ": " << res->body;
    return json::parse(res->body);
  }

  json post(const std::string& path, const json& body, int expect) const {
    auto res = client().Post(path, body.dump(), "application/json");
    EXPECT_TRUE(res) << path;
    if (!res) return nullptr;
    EXPECT_EQ(res->status, expect) << path << ": " << res->body;
    return json::parse(res->body);
  }

  // Registers an app and a group owning team `team`, as the UI would.
  void open_team(const std::string& team) {
    const auto app = post("/api/apps", {{"user", "olga"}, {"name", "toy-" + team}}, 201);
    const auto group = post("/api/groups", {{"user", "olga"}}, 201);
    post("/api/groups/" + group["group_id"].get<std::string>() + "/attach",
         {{"user", "olga"}, {"app_id", app["app_id"]}, {"team_id", team}, {"team_alias", "crew"}}, 200);
  }

  void add_worker(const std::string& id, const std::string& team, double delay_ms_per_1000 = 0.0) {
    auto [manager_end, worker_end] = proto::make_inproc_pair();
    gateway.serve(std::move(manager_end));
    proto::AgentOptions o;
    o.worker_id = id;
    o.team_id = team;
    o.owner = "donor-" + id;
    o.delay_ms_per_1000 = delay_ms_per_1000;
    agents.push_back(std::make_unique<proto::WorkerAgent>(std::move(worker_end), o));
    threads.emplace_back([a = agents.back().get()] { a->run(); });
  }

  void await_workers(std::size_t n) {
    for (int i = 0; i < 5000 && loop.snapshot()->workers.size() < n; ++i) std::this_thread::sleep_for(1ms);
    ASSERT_EQ(loop.snapshot()->workers.size(), n);
  }

  json submit(const std::string& team, const json& params, int expect = 202) {
    return post("/api/jobs", {{"player", "pat"}, {"team", team}, {"params", params}}, expect);
  }

  jobs::ManagerLoop loop;
  registry::Registry registry;
  service::Service service;
  service::HttpServer http;
  proto::WorkerGateway gateway;
  int port = 0;
  std::vector<std::unique_ptr<proto::WorkerAgent>> agents;
  std::vector<std::thread> threads;
};

struct SseEvent {
  std::string kind;
  json data;
};

// Reads a progress stream to its end.
std::vector<SseEvent> read_stream(const Rig& rig, const std::string& job_id, const std::string& query = "",
                                  int* status = nullptr) {
  std::string buffer;
  std::vector<SseEvent> events;
  auto res = rig.client().Get("/api/jobs/" + job_id + "/stream" + query, [&](const char* data, std::size_t n) {
    buffer.append(data, n);
    for (auto end = buffer.find("\n\n"); end != std::string::npos; end = buffer.find("\n\n")) {
      const std::string block = buffer.substr(0, end);
      buffer.erase(0, end + 2);
      SseEvent e;
      std::size_t pos = 0;
      while (pos < block.size()) {
        auto nl = block.find('\n', pos);
        if (nl == std::string::npos) nl = block.size();
        const std::string line = block.substr(pos, nl - pos);
        if (line.rfind("event: ", 0) == 0) e.kind = line.substr(7);
        if (line.rfind("data: ", 0) == 0) e.data = json::parse(line.substr(6));
        pos = nl + 1;
      }
      if (!e.kind.empty()) events.push_back(std::move(e));
    }
    return true;
  });
  if (status) *status = res ? res->status : -1;
  return events;
}

TEST(Status, FreshServerHasEmptyLists) {
  Rig rig;
  const auto s = rig.get("/api/status");
  EXPECT_TRUE(s["workers"].empty());
  EXPECT_TRUE(s["jobs"].empty());
  EXPECT_TRUE(s["teams"].empty());
  EXPECT_TRUE(s["leaderboard"]["players"].empty());
  EXPECT_TRUE(s["leaderboard"]["donors"].empty());
  EXPECT_EQ(s["counters"]["events_accepted"], 0);
}

TEST(Submit, AcceptsWithEstimateWithinBudget) {
  Rig rig;
  rig.open_team("T");
  rig.submit("T", {2.0, 0.5, 3.0, 0.25});  // seeds nothing yet: cache is empty

  const auto started = std::chrono::steady_clock::now();
  const auto r = rig.submit("T", json{{"a1", 2.0}, {"b1", 0.5}, {"a2", 3.0}, {"b2", 0.25}});
  const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  EXPECT_LT(ms, 100.0);
  EXPECT_TRUE(r["job_id"].is_string());
  EXPECT_TRUE(r.contains("estimate"));
  EXPECT_LT(r["elapsed_ms"].get<double>(), 100.0);
}

TEST(Submit, OutOfRangeNamesTheDimension) {
  Rig rig;
  rig.open_team("T");
  const auto r = rig.submit("T", {2.0, 0.5, 9.0, 0.25}, 400);
  EXPECT_EQ(r["error"]["code"], "out_of_space");
  EXPECT_NE(r["error"]["detail"].get<std::string>().find("a2"), std::string::npos);

  const auto missing = rig.submit("T", json{{"a1", 2.0}, {"b1", 0.5}, {"a2", 3.0}}, 400);
  EXPECT_NE(missing["error"]["detail"].get<std::string>().find("b2"), std::string::npos);
}

TEST(Submit, UnknownTeamIsRefused) {
  Rig rig;
  const auto r = rig.submit("nobody", {2.0, 0.5, 3.0, 0.25}, 404);
  EXPECT_EQ(r["error"]["code"], "unknown_team");
}

TEST(Submit, MalformedBodies) {
  Rig rig;
  auto res = rig.client().Post("/api/jobs", "{not json", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  rig.post("/api/jobs", {{"player", "pat"}, {"team", "T"}}, 400);
  rig.post("/api/jobs", {{"player", "pat"}, {"team", "T"}, {"params", "fast"}}, 400);
}

TEST(Stream, SubscribeAtSubmitSeesEstimateThenInterims) {
  Rig rig;  // default sizes: 100k target, 10k chunks
  rig.open_team("T");
  rig.add_worker("w1", "T");
  rig.add_worker("w2", "T");
  rig.await_workers(2);

  const auto r = rig.submit("T", {2.0, 0.5, 3.0, 0.25});
  const auto events = read_stream(rig, r["job_id"], "?from=start");
  ASSERT_FALSE(events.empty());
  EXPECT_EQ(events.front().kind, "estimate");
  EXPECT_EQ(events.back().kind, "completed");
  int interims = 0;
  std::uint64_t last = 0;
  for (const auto& e : events) {
    EXPECT_EQ(e.kind, e.data["kind"]);
    const auto merged = e.data["merged_events"].get<std::uint64_t>();
    EXPECT_GE(merged, last);
    last = merged;
    interims += e.kind == "interim";
  }
  EXPECT_GE(interims, 10);
  EXPECT_GE(last, 100000u);
  EXPECT_FALSE(events.back().data["fit"].is_null());
}

TEST(Stream, SubscribeAfterCompletionReplaysOneEvent) {
  jobs::ManagerConfig config;
  config.target_events = 20000;
  config.chunk_events = 5000;
  Rig rig(config);
  rig.open_team("T");
  rig.add_worker("w1", "T");
  rig.await_workers(1);
  const auto r = rig.submit("T", {2.0, 0.5, 3.0, 0.25});
  read_stream(rig, r["job_id"]);

  const auto replay = read_stream(rig, r["job_id"]);
  ASSERT_EQ(replay.size(), 1u);
  EXPECT_EQ(replay[0].kind, "completed");

  const auto polled = rig.get("/api/jobs/" + r["job_id"].get<std::string>());
  EXPECT_EQ(polled["state"], "COMPLETED");
  EXPECT_EQ(polled["latest"]["kind"], "completed");
}

TEST(Stream, UnknownJob) {
  Rig rig;
  int status = 0;
  read_stream(rig, "job-404", "", &status);
  EXPECT_EQ(status, 404);
  EXPECT_EQ(rig.get("/api/jobs/job-404", 404)["error"]["code"], "unknown_job");
}

TEST(Stream, CancelClosesTheStream) {
  Rig rig;
  rig.open_team("T");
  const auto r = rig.submit("T", {2.0, 0.5, 3.0, 0.25});
  const std::string id = r["job_id"];
  std::vector<SseEvent> events;
  std::thread reader([&] { events = read_stream(rig, id); });
  std::this_thread::sleep_for(50ms);
  EXPECT_EQ(rig.post("/api/jobs/" + id + "/cancel", json::object(), 200)["state"], "CANCELLED");
  reader.join();
  ASSERT_FALSE(events.empty());
  EXPECT_EQ(events.back().kind, "cancelled");
  rig.post("/api/jobs/" + id + "/cancel", json::object(), 409);
}

TEST(Status, LeaderboardAndWorkersAfterCompletion) {
  jobs::ManagerConfig config;
  config.target_events = 20000;
  config.chunk_events = 5000;
  Rig rig(config);
  rig.open_team("T");
  rig.add_worker("w1", "T");
  rig.await_workers(1);

  const auto connected = rig.get("/api/status");
  ASSERT_EQ(connected["workers"].size(), 1u);
  EXPECT_EQ(connected["workers"][0]["worker_id"], "w1");
  EXPECT_EQ(connected["workers"][0]["team_id"], "T");
  EXPECT_EQ(connected["workers"][0]["capability"], 10000.0);
  EXPECT_EQ(connected["workers"][0]["state"], "IDLE");

  const auto r = rig.submit("T", {2.0, 0.5, 3.0, 0.25});
  const auto events = read_stream(rig, r["job_id"]);
  const auto credit = events.back().data["player_credit"];
  ASSERT_TRUE(credit.is_number());

  const auto board = rig.get("/api/leaderboard");
  ASSERT_EQ(board["players"].size(), 1u);
  EXPECT_EQ(board["players"][0]["player_id"], "pat");
  EXPECT_EQ(board["players"][0]["points"], credit);
  ASSERT_EQ(board["donors"].size(), 1u);
  EXPECT_EQ(board["donors"][0]["owner"], "donor-w1");
  EXPECT_EQ(board["donors"][0]["points"], 2);
  EXPECT_EQ(rig.get("/api/status")["leaderboard"], json({{"players", board["players"]}, {"donors", board["donors"]}}));
}

TEST(Status, SnapshotNeverShowsWorkerOnFinishedJob) {
  jobs::ManagerConfig config;
  config.target_events = 20000;
  config.chunk_events = 1000;
  Rig rig(config);
  rig.open_team("T");
  for (int i = 0; i < 3; ++i) rig.add_worker("w" + std::to_string(i), "T", 0.2);
  rig.await_workers(3);

  std::atomic<bool> done{false};
  std::thread player([&] {
    for (int i = 0; i < 6; ++i) {
      const auto r = rig.submit("T", {1.0 + 0.5 * i, 0.5, 3.0, 0.25});
      if (i % 2) rig.post("/api/jobs/" + r["job_id"].get<std::string>() + "/cancel", json::object(), 200);
    }
    done = true;
  });
  int samples = 0;
  while (!done || samples < 50) {
    const auto s = rig.get("/api/status");
    std::map<std::string, std::string> state;
    for (const auto& j : s["jobs"]) state[j["job_id"]] = j["state"];
    for (const auto& w : s["workers"]) {
      if (w["state"] != "ASSIGNED") continue;
      const std::string job = w["current_job"];
      EXPECT_EQ(state.at(job), "RUNNING") << "snapshot " << s["version"];
    }
    ++samples;
  }
  player.join();
}

TEST(Registry, EndpointsFollowTheRules) {
  Rig rig;
  const auto app = rig.post("/api/apps", {{"user", "olga"}, {"name", "toy"}, {"description", "d"}}, 201);
  EXPECT_EQ(app["app_id"], "app-1");
  EXPECT_EQ(rig.post("/api/apps", {{"user", "ivan"}, {"name", "toy"}}, 409)["error"]["code"], "duplicate_name");
  EXPECT_EQ(rig.post("/api/apps", {{"name", "x"}}, 400)["error"]["code"], "invalid_argument");

  const auto group = rig.post("/api/groups", {{"user", "olga"}}, 201);
  const std::string g = "/api/groups/" + group["group_id"].get<std::string>();
  EXPECT_EQ(rig.post(g + "/attach", {{"user", "ivan"}, {"app_id", "app-1"}, {"team_id", "T"}, {"team_alias", "a"}}, 403)
                ["error"]["code"],
            "not_owner");
  rig.post(g + "/attach", {{"user", "olga"}, {"app_id", "app-1"}, {"team_id", "T"}, {"team_alias", "a"}}, 200);
  EXPECT_EQ(rig.post(g + "/launch", {{"user", "ivan"}, {"team_alias", "a"}}, 403)["error"]["code"], "not_member");
  rig.post(g + "/join", {{"user", "ivan"}}, 200);
  const auto ctx = rig.post(g + "/launch", {{"user", "ivan"}, {"team_alias", "a"}}, 201);
  EXPECT_EQ(ctx["team_id"], "T");
  EXPECT_EQ(ctx["owner"], "ivan");
  EXPECT_EQ(rig.post(g + "/launch", {{"user", "ivan"}, {"team_alias", "zz"}}, 404)["error"]["code"], "unknown_alias");
  EXPECT_EQ(rig.post("/api/groups/group-9/join", {{"user", "ivan"}}, 404)["error"]["code"], "unknown_group");

  EXPECT_EQ(rig.get("/api/apps").size(), 1u);
  EXPECT_EQ(rig.get("/api/groups")[0]["members"], json({"ivan", "olga"}));
  // Attaching made the team available for tunes.
  EXPECT_EQ(rig.get("/api/status")["teams"][0]["team_id"], "T");
}

TEST(Space, ServesDimsAndReference) {
  Rig rig;
  const auto s = rig.get("/api/space");
  ASSERT_EQ(s["dims"].size(), 4u);
  EXPECT_EQ(s["dims"][2]["name"], "a2");
  EXPECT_EQ(s["observables"].size(), 2u);
  ASSERT_EQ(s["reference"].size(), 2u);
  EXPECT_FALSE(s.contains("truth"));
}

TEST(Http, CorsPreflight) {
  Rig rig;
  auto res = rig.client().Options("/api/jobs");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 204);
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
  auto get = rig.client().Get("/api/status");
  EXPECT_EQ(get->get_header_value("Access-Control-Allow-Origin"), "*");
}

TEST(Json, ProgressEventRoundTrip) {
  jobs::ProgressEvent e;
  e.job_id = "job-3";
  e.kind = jobs::ProgressKind::kInterim;
  e.merged_events = 4000;
  e.target_events = 20000;
  e.worker_count = 2;
  e.histograms = model().empty_set(kTruth);
  const json j = e;
  EXPECT_EQ(json(j.get<jobs::ProgressEvent>()), j);
  EXPECT_EQ(service::sse_frame(e).substr(0, 21), "event: interim\ndata: ");
}

}  // namespace
