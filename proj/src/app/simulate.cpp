#include "tunegrid/app/simulate.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <random>

#include "tunegrid/error.hpp"
#include "tunegrid/histo/json.hpp"
#include "tunegrid/jobs/job_manager.hpp"
#include "tunegrid/service/api_json.hpp"

namespace tunegrid::app {
namespace {

using jobs::TimeMs;

constexpr const char* kTeam = "sim";
constexpr const char* kPlayer = "scan";

struct Task {
  std::string job_id;
  tune::TuneParameters params;
  std::uint64_t chunk_events = 0;
  std::uint64_t seed = 0;
  std::uint64_t next = 0;  // sub-chunk index within the assignment
};

struct SimWorker {
  std::string id;
  std::string owner;
  double speed = 1.0;  // events per virtual ms
  bool connected = true;
  std::uint64_t generation = 0;  // bumped on every new task, abort or departure
  std::optional<Task> task;
};

struct Wakeup {
  TimeMs at = 0;
  std::uint64_t order = 0;
  std::size_t worker = 0;
  std::uint64_t generation = 0;
  bool rejoin = false;

  bool operator>(const Wakeup& o) const { return std::tie(at, order) > std::tie(o.at, o.order); }
};

// Scripted player: batches of probes along one dim at a time.
class CoordinateScan {
 public:
  CoordinateScan(const tune::ParamSpace& space, std::size_t sweeps, std::size_t probes)
      : space_(space), sweeps_(sweeps), probes_(probes) {
    for (const auto& d : space.dims()) incumbent_.values.push_back(grid(d, probes_ / 2));
    if (probes_ % 2 == 0) {
      for (std::size_t i = 0; i < space.dims().size(); ++i) {
        const auto& d = space.dims()[i];
        incumbent_.values[i] = d.min + 0.5 * (d.max - d.min);
      }
    }
  }

  /// Next batch; empty when the scan is over.
  std::vector<tune::TuneParameters> next() {
    if (!started_) {
      started_ = true;
      return {incumbent_};
    }
    while (sweep_ < sweeps_) {
      const std::size_t d = dim_;
      if (++dim_ == space_.dims().size()) {
        dim_ = 0;
        ++sweep_;
      }
      std::vector<tune::TuneParameters> batch;
      for (std::size_t k = 0; k < probes_; ++k) {
        auto p = incumbent_;
        p.values[d] = grid(space_.dims()[d], k);
        if (p.values[d] != incumbent_.values[d]) batch.push_back(p);
      }
      if (!batch.empty()) return batch;
    }
    return {};
  }

  /// Result of one probe; the incumbent changes only on strict improvement.
  void observe(const tune::TuneParameters& p, double reduced) {
    if (!score_ || reduced < *score_) {
      score_ = reduced;
      incumbent_ = p;
    }
  }

 private:
  static double grid(const tune::Dimension& d, std::size_t k, std::size_t n) {
    return n == 1 ? d.min + 0.5 * (d.max - d.min) : d.min + (d.max - d.min) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  double grid(const tune::Dimension& d, std::size_t k) const { return grid(d, k, probes_); }

  const tune::ParamSpace& space_;
  std::size_t sweeps_, probes_;
  tune::TuneParameters incumbent_;
  std::optional<double> score_;
  bool started_ = false;
  std::size_t sweep_ = 0, dim_ = 0;
};

class Simulation {
 public:
  explicit Simulation(const SimulateOptions& o)
      : o_(o), manager_(o.model, o.truth, manager_config(o)), scan_(manager_.model().space(), o.sweeps, o.probes), rng_(o.seed) {
    manager_.add_team(kTeam);
    for (std::size_t i = 0; i < o.workers; ++i) {
      SimWorker w;
      w.id = fmt::format("sim-{:02}", i + 1);
      w.owner = "donor-" + std::to_string(i + 1);
      const double frac = o.workers > 1 ? static_cast<double>(i) / static_cast<double>(o.workers - 1) : 0.0;
      w.speed = o.events_per_ms * (1.0 + o.speed_spread * frac);
      workers_.push_back(std::move(w));
    }
    for (std::size_t i = 0; i < workers_.size(); ++i) index_.emplace(workers_[i].id, i);
  }

  SimulationReport run() {
    const auto started = std::chrono::steady_clock::now();
    for (auto& w : workers_) {
      manager_.register_worker(w.id, kTeam, w.speed * 1000.0, w.owner, now_);
      route();
    }
    submit_next_batch();
    while (outstanding_ > 0) {
      if (queue_.empty()) {
        report_.starved = true;
        break;
      }
      const Wakeup up = queue_.top();
      queue_.pop();
      now_ = up.at;
      if (up.rejoin) {
        rejoin(up.worker);
      } else {
        deliver(up.worker, up.generation);
      }
      if (outstanding_ == 0) submit_next_batch();
    }
    report_.options = o_;
    report_.virtual_ms = now_;
    report_.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    report_.events_total = manager_.counters().events_accepted;
    report_.preemptions = manager_.counters().preemptions;
    report_.credits = manager_.credits();
    for (auto& j : report_.jobs) j.state = manager_.job(j.job_id).state;
    return std::move(report_);
  }

 private:
  static jobs::ManagerConfig manager_config(const SimulateOptions& o) {
    auto c = o.jobs;
    c.seed = o.seed;
    // No heartbeats are simulated; keep the timeout out of reach.
    c.heartbeat_interval_ms = std::numeric_limits<TimeMs>::max() / 8;
    return c;
  }

  void submit_next_batch() {
    if (report_.jobs.size() >= o_.budget) return;
    auto batch = scan_.next();
    const std::size_t room = o_.budget - report_.jobs.size();
    if (batch.size() > room) batch.resize(room);
    for (const auto& p : batch) {
      const auto r = manager_.submit(kTeam, kPlayer, p, now_);
      SimulatedJob j;
      j.index = report_.jobs.size();
      j.job_id = r.job_id;
      j.params = p;
      j.submitted_ms = now_;
      by_job_.emplace(r.job_id, j.index);
      report_.jobs.push_back(std::move(j));
      ++outstanding_;
      route();
    }
  }

  void schedule(std::size_t wi) {
    const SimWorker& w = workers_[wi];
    const auto ms = static_cast<TimeMs>(std::ceil(static_cast<double>(w.task->chunk_events) / w.speed));
    queue_.push({now_ + std::max<TimeMs>(ms, 1), order_++, wi, w.generation, false});
  }

  void deliver(std::size_t wi, std::uint64_t generation) {
    SimWorker& w = workers_[wi];
    if (!w.connected || w.generation != generation || !w.task) return;
    Task& t = *w.task;
    const auto chunk = gen::generate_chunk(manager_.model(), t.params, t.chunk_events, gen::Seed{t.seed + t.next++});
    manager_.on_interim(w.id, t.job_id, chunk, now_);
    route();
    if (w.generation == generation && w.task) schedule(wi);

    if (o_.churn > 0.0 && uniform() < o_.churn) {
      manager_.on_disconnect(w.id);
      w.connected = false;
      w.task.reset();
      ++w.generation;
      route();
      queue_.push({now_ + o_.rejoin_ms, order_++, wi, w.generation, true});
    }
  }

  void rejoin(std::size_t wi) {
    SimWorker& w = workers_[wi];
    w.connected = true;
    ++report_.reconnects;
    manager_.register_worker(w.id, kTeam, w.speed * 1000.0, w.owner, now_);
    route();
  }

  // Applies the manager's queued commands and progress events.
  void route() {
    auto fx = manager_.take_effects();
    for (const auto& c : fx.commands) {
      SimWorker& w = workers_[index_.at(jobs::target_worker(c))];
      if (const auto* a = std::get_if<jobs::AssignCommand>(&c)) {
        w.task = Task{a->job_id, a->params, a->chunk_events, a->chunk_seed.value, 0};
        ++w.generation;
        schedule(index_.at(w.id));
      } else if (std::holds_alternative<jobs::AbortCommand>(c)) {
        w.task.reset();
        ++w.generation;
      }
    }
    for (const auto& e : fx.events) record(e);
  }

  void record(const jobs::ProgressEvent& e) {
    SimulatedJob& j = report_.jobs.at(by_job_.at(e.job_id));
    j.merged_events = e.merged_events;
    switch (e.kind) {
      case jobs::ProgressKind::kEstimate:
        j.estimate_first = j.interims == 0;
        j.estimate_quality = e.estimate_quality;
        break;
      case jobs::ProgressKind::kInterim:
        ++j.interims;
        break;
      case jobs::ProgressKind::kCompleted:
        j.fit = e.fit;
        j.player_credit = e.player_credit;
        j.completed_ms = now_;
        finish(j);
        break;
      case jobs::ProgressKind::kCancelled:
        finish(j);
        break;
    }
  }

  void finish(const SimulatedJob& j) {
    --outstanding_;
    if (!j.fit) return;
    scan_.observe(j.params, j.fit->reduced);
    const double best = report_.series.empty() ? j.fit->reduced : std::min(report_.series.back().best, j.fit->reduced);
    report_.series.push_back({j.index, j.fit->reduced, best});
    if (!report_.best || j.fit->reduced < report_.jobs[*report_.best].fit->reduced) report_.best = j.index;
  }

  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  const SimulateOptions& o_;
  jobs::JobManager manager_;
  CoordinateScan scan_;
  std::mt19937_64 rng_;
  std::vector<SimWorker> workers_;
  std::map<std::string, std::size_t> index_;
  std::map<std::string, std::size_t> by_job_;
  std::priority_queue<Wakeup, std::vector<Wakeup>, std::greater<>> queue_;
  std::uint64_t order_ = 0;
  std::size_t outstanding_ = 0;
  TimeMs now_ = 0;
  SimulationReport report_;
};

nlohmann::json job_json(const SimulatedJob& j) {
  return {{"index", j.index},
          {"job_id", j.job_id},
          {"params", j.params},
          {"state", jobs::to_string(j.state)},
          {"fit", j.fit ? nlohmann::json(*j.fit) : nlohmann::json(nullptr)},
          {"player_credit", j.player_credit ? nlohmann::json(*j.player_credit) : nlohmann::json(nullptr)},
          {"estimate_quality", j.estimate_quality ? nlohmann::json(*j.estimate_quality) : nlohmann::json(nullptr)},
          {"merged_events", j.merged_events},
          {"interims", j.interims},
          {"estimate_first", j.estimate_first},
          {"submitted_ms", j.submitted_ms},
          {"completed_ms", j.completed_ms ? nlohmann::json(*j.completed_ms) : nlohmann::json(nullptr)}};
}

}  // namespace

std::size_t SimulationReport::completed() const {
  return static_cast<std::size_t>(
      std::count_if(jobs.begin(), jobs.end(), [](const auto& j) { return j.state == jobs::JobState::kCompleted; }));
}

double SimulationReport::virtual_events_per_sec() const {
  return virtual_ms > 0 ? 1000.0 * static_cast<double>(events_total) / static_cast<double>(virtual_ms) : 0.0;
}

double SimulationReport::wall_events_per_sec() const {
  return wall_ms > 0 ? 1000.0 * static_cast<double>(events_total) / wall_ms : 0.0;
}

SimulationReport simulate(const SimulateOptions& options) {
  if (options.strategy != "coordinate-scan") {
    throw Error(ErrorCode::kConfig, "unknown strategy '" + options.strategy + "'");
  }
  if (options.events_per_ms <= 0.0 || options.speed_spread < 0.0) {
    throw Error(ErrorCode::kConfig, "worker speeds must be positive");
  }
  if (options.churn < 0.0 || options.churn >= 1.0) throw Error(ErrorCode::kConfig, "churn must lie in [0, 1)");
  if (options.probes == 0) throw Error(ErrorCode::kConfig, "probes must be positive");
  options.model.space().check(options.truth);
  return Simulation(options).run();
}

nlohmann::json to_json(const SimulationReport& r) {
  nlohmann::json jobs = nlohmann::json::array();
  for (const auto& j : r.jobs) jobs.push_back(job_json(j));
  nlohmann::json series = nlohmann::json::array();
  for (const auto& s : r.series) series.push_back({{"job", s.job}, {"reduced", s.reduced}, {"best", s.best}});
  const auto& o = r.options;
  return {{"options",
           {{"workers", o.workers},
            {"budget", o.budget},
            {"seed", o.seed},
            {"strategy", o.strategy},
            {"target_events", o.jobs.target_events},
            {"chunk_events", o.jobs.chunk_events},
            {"events_per_ms", o.events_per_ms},
            {"speed_spread", o.speed_spread},
            {"churn", o.churn}}},
          {"jobs", jobs},
          {"best", r.best ? job_json(r.jobs[*r.best]) : nlohmann::json(nullptr)},
          {"starved", r.starved},
          {"completed", r.completed()},
          {"virtual_ms", r.virtual_ms},
          {"wall_ms", r.wall_ms},
          {"events_total", r.events_total},
          {"events_per_sec", {{"virtual", r.virtual_events_per_sec()}, {"wall", r.wall_events_per_sec()}}},
          {"preemptions", r.preemptions},
          {"reconnects", r.reconnects},
          {"credits", jobs::leaderboard_json(r.credits)},
          {"series", series}};
}

std::string format_table(const SimulationReport& r) {
  std::string out = fmt::format("{:>4}  {:<8}  {:<34}  {:<10}  {:>10}  {:>6}  {:>8}  {:>10}\n", "#", "job", "params",
                                "state", "reduced", "credit", "interims", "done_ms");
  for (const auto& j : r.jobs) {
    std::string params;
    for (double v : j.params.values) params += fmt::format("{}{:.4g}", params.empty() ? "" : " ", v);
    out += fmt::format("{:>4}  {:<8}  {:<34}  {:<10}  {:>10}  {:>6}  {:>8}  {:>10}\n", j.index, j.job_id, params,
                       jobs::to_string(j.state), j.fit ? fmt::format("{:.3f}", j.fit->reduced) : "-",
                       j.player_credit ? std::to_string(*j.player_credit) : "-", j.interims,
                       j.completed_ms ? std::to_string(*j.completed_ms) : "-");
  }
  out += fmt::format("\njobs {} completed {}  workers {}  seed {}\n", r.jobs.size(), r.completed(), r.options.workers,
                     r.options.seed);
  if (r.best) {
    const auto& b = r.jobs[*r.best];
    out += fmt::format("best {} reduced {:.3f} credit {}\n", b.job_id, b.fit->reduced, *b.player_credit);
  }
  out += fmt::format("events {}  virtual {} ms ({:.0f} ev/s)  wall {:.1f} ms ({:.0f} ev/s)\n", r.events_total,
                     r.virtual_ms, r.virtual_events_per_sec(), r.wall_ms, r.wall_events_per_sec());
  if (r.starved) out += "STARVED: jobs left queued with no worker to run them\n";
  return out;
}

bool same_run(const SimulationReport& a, const SimulationReport& b) {
  auto ja = to_json(a), jb = to_json(b);
  for (auto* j : {&ja, &jb}) {
    j->erase("wall_ms");
    (*j)["events_per_sec"].erase("wall");
  }
  return ja == jb;
}

}  // namespace tunegrid::app
