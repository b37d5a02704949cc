// tunegrid: run the server, a worker agent, or a headless simulation.

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <thread>

#include "tunegrid/app/config.hpp"
#include "tunegrid/app/server_stack.hpp"
#include "tunegrid/app/simulate.hpp"
#include "tunegrid/error.hpp"
#include "tunegrid/proto/worker_agent.hpp"

namespace {

using namespace tunegrid;
using namespace std::chrono_literals;

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

void log_line(const std::string& who, const std::string& line) {
  const auto now = std::chrono::floor<std::chrono::milliseconds>(std::chrono::system_clock::now());
  fmt::print(stderr, "{:%H:%M:%S} [{}] {}\n", now, who, line);
}

// Sleeps in short steps so an interrupt is noticed promptly.
bool sleep_unless_interrupted(std::chrono::milliseconds total) {
  for (auto left = total; left > 0ms && !g_interrupted; left -= 50ms) std::this_thread::sleep_for(std::min(left, 50ms));
  return !g_interrupted;
}

int run_server(const std::string& config_path) {
  const auto config = app::load_config(config_path);
  app::ServerStack stack(config);
  fmt::print("tunegrid server listening\n  http    http://{}/api/status\n  workers {}\n", stack.http_endpoint().str(),
             stack.worker_endpoint().str());
  if (!config.registry_store.empty()) fmt::print("  store   {}\n", config.registry_store.string());
  std::fflush(stdout);
  while (!g_interrupted) std::this_thread::sleep_for(100ms);
  log_line("server", "shutting down");
  stack.stop();
  return 0;
}

struct WorkerArgs {
  std::string context;
  std::string manager;
  std::string team;
  std::string id;
  std::string owner;
  double delay = 0.0;
  int retries = 5;
  int backoff_ms = 200;
  int max_backoff_ms = 5000;
};

int run_worker(WorkerArgs args) {
  proto::AgentOptions options;
  std::string manager = args.manager;
  if (!args.context.empty()) {
    std::ifstream in(args.context);
    if (!in) throw Error(ErrorCode::kConfig, "cannot read launch context " + args.context);
    registry::LaunchContext ctx;
    try {
      ctx = nlohmann::json::parse(in).get<registry::LaunchContext>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kConfig, args.context + ": " + e.what());
    }
    manager = ctx.manager_endpoint;
    options.team_id = ctx.team_id;
    options.worker_id = ctx.worker_id;
    options.owner = ctx.owner;
    options.capability = ctx.capability_hint;
  } else {
    if (manager.empty() || args.team.empty()) throw Error(ErrorCode::kConfig, "need --context or --manager and --team");
    options.team_id = args.team;
    options.worker_id = args.id.empty() ? fmt::format("worker-{}", ::getpid()) : args.id;
  }
  if (!args.owner.empty()) options.owner = args.owner;
  options.delay_ms_per_1000 = args.delay;
  const auto endpoint = app::parse_endpoint(manager);
  const std::string who = "worker " + options.worker_id;
  options.log = [who](const std::string& line) { log_line(who, line); };

  int failures = 0;
  auto backoff = std::chrono::milliseconds(args.backoff_ms);
  while (!g_interrupted) {
    std::unique_ptr<proto::Connection> connection;
    try {
      connection = proto::tcp_connect(endpoint.host, static_cast<std::uint16_t>(endpoint.port));
    } catch (const Error& e) {
      if (++failures > args.retries) {
        log_line(who, fmt::format("giving up after {} attempts: {}", failures, e.what()));
        return 2;
      }
      log_line(who, fmt::format("cannot reach {} ({}); retry {}/{} in {} ms", endpoint.str(), e.what(), failures,
                                args.retries, backoff.count()));
      if (!sleep_unless_interrupted(backoff)) break;
      backoff = std::min(backoff * 2, std::chrono::milliseconds(args.max_backoff_ms));
      continue;
    }

    log_line(who, fmt::format("HELLO team={} manager={}", options.team_id, endpoint.str()));
    proto::WorkerAgent agent(std::move(connection), options);
    std::atomic<bool> done{false};
    std::thread watcher([&] {
      while (!done && !g_interrupted) std::this_thread::sleep_for(50ms);
      if (g_interrupted) agent.stop();
    });
    const auto exit = agent.run();
    done = true;
    watcher.join();
    log_line(who, fmt::format("session ended: {}", proto::to_string(exit)));

    if (exit == proto::AgentExit::kRejected) return 3;
    if (exit != proto::AgentExit::kDisconnected) return 0;
    if (agent.welcomed()) {
      failures = 0;
      backoff = std::chrono::milliseconds(args.backoff_ms);
    } else if (++failures > args.retries) {
      log_line(who, fmt::format("giving up after {} attempts", failures));
      return 2;
    }
    if (!sleep_unless_interrupted(backoff)) break;
  }
  return 0;
}

struct SimulateArgs {
  app::SimulateOptions options;
  std::string config;
  std::string out;
  std::uint64_t target = 0;
  std::uint64_t chunk = 0;
};

int run_simulate(SimulateArgs args) {
  auto& o = args.options;
  if (!args.config.empty()) {
    const auto config = app::load_config(args.config);
    o.model = config.model;
    o.truth = config.truth;
    o.jobs = config.jobs;
  }
  if (args.target) o.jobs.target_events = args.target;
  if (args.chunk) o.jobs.chunk_events = args.chunk;
  const auto report = app::simulate(o);
  fmt::print("{}", app::format_table(report));
  if (!args.out.empty()) {
    std::ofstream out(args.out);
    out << app::to_json(report).dump(2) << '\n';
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + args.out);
  }
  return report.starved ? 4 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"tunegrid: volunteer tuning grid"};
  cli.require_subcommand(1);

  std::string config_path;
  auto* server = cli.add_subcommand("server", "Run registry, job manager and HTTP service");
  server->add_option("-c,--config", config_path, "Server config (JSON)")->required()->check(CLI::ExistingFile);

  WorkerArgs worker_args;
  auto* worker = cli.add_subcommand("worker", "Run one worker agent");
  auto* context_opt = worker->add_option("--context", worker_args.context, "Launch context file from the registry");
  worker->add_option("--manager", worker_args.manager, "Manager worker endpoint host:port")->excludes(context_opt);
  worker->add_option("--team", worker_args.team, "Team id")->excludes(context_opt);
  worker->add_option("--id", worker_args.id, "Worker id")->excludes(context_opt);
  worker->add_option("--owner", worker_args.owner, "Donor credited with points");
  worker->add_option("--delay-ms-per-1000", worker_args.delay, "Artificial slowness per 1000 events");
  worker->add_option("--retries", worker_args.retries, "Connection attempts before giving up")->capture_default_str();
  worker->add_option("--backoff-ms", worker_args.backoff_ms, "First retry delay")->capture_default_str();
  worker->add_option("--max-backoff-ms", worker_args.max_backoff_ms, "Retry delay cap")->capture_default_str();

  SimulateArgs sim;
  auto* simulate = cli.add_subcommand("simulate", "Headless end-to-end run with a scripted player");
  simulate->add_option("-k,--workers", sim.options.workers, "Simulated workers")->capture_default_str();
  simulate->add_option("--strategy", sim.options.strategy, "Player strategy")
      ->check(CLI::IsMember({"coordinate-scan"}))
      ->capture_default_str();
  simulate->add_option("--budget", sim.options.budget, "Maximum jobs")->capture_default_str();
  simulate->add_option("--seed", sim.options.seed, "Run seed")->capture_default_str();
  simulate->add_option("--config", sim.config, "Take model, truth and job sizes from a server config")
      ->check(CLI::ExistingFile);
  simulate->add_option("--target", sim.target, "Events per job");
  simulate->add_option("--chunk", sim.chunk, "Events per chunk");
  simulate->add_option("--speed", sim.options.events_per_ms, "Events per virtual ms of the slowest worker")
      ->capture_default_str();
  simulate->add_option("--speed-spread", sim.options.speed_spread, "Fastest worker runs (1 + spread) times faster");
  simulate->add_option("--churn", sim.options.churn, "Chance a worker leaves after each chunk");
  simulate->add_option("--rejoin-ms", sim.options.rejoin_ms, "Virtual delay before a departed worker returns");
  simulate->add_option("--out", sim.out, "Write the JSON report here");

  CLI11_PARSE(cli, argc, argv);

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  try {
    if (server->parsed()) return run_server(config_path);
    if (worker->parsed()) return run_worker(worker_args);
    return run_simulate(sim);
  } catch (const Error& e) {
    fmt::print(stderr, "tunegrid: {}: {}\n", error_code_name(e.code()), e.what());
    return e.code() == ErrorCode::kConfig ? 2 : 1;
  }
}
