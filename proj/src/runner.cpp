#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <exception>
#include <mutex>
#include <optional>
#include <set>
#include <thread>

#include "experiment_support.hpp"

namespace mploc {

namespace {

struct Kind {
  Record (*sample)(const ExperimentConfig&, long);
  Summary (*summary)(const ExperimentConfig&, const std::vector<Record>&);
};

const Kind& kind_of(const std::string& name) {
  using namespace detail;
  static const std::map<std::string, Kind> table = {
      {"wegner", {wegner_sample, wegner_summary}},
      {"evc2", {evc2_sample, evc2_summary}},
      {"srcm", {srcm_sample, srcm_summary}},
      {"ils", {ils_sample, ils_summary}},
      {"wi_prob", {wi_prob_sample, wi_prob_summary}},
      {"fe_to_ei", {fe_to_ei_sample, fe_to_ei_summary}},
      {"scaling_step", {scaling_step_sample, scaling_step_summary}},
      {"decay", {decay_sample, decay_summary}},
      {"ct", {ct_sample, ct_summary}},
  };
  auto it = table.find(name);
  if (it == table.end()) throw ConfigError("unknown experiment kind '" + name + "'");
  return it->second;
}

}  // namespace

Record run_sample(const ExperimentConfig& c, long index) {
  Record body = kind_of(c.kind).sample(c, index);
  Record r;
  r["digest"] = config_digest(config_to_json(c));
  for (auto it = body.begin(); it != body.end(); ++it) r[it.key()] = std::move(it.value());
  return r;
}

Summary summarize(const ExperimentConfig& c, const std::vector<Record>& records) {
  if (records.empty()) throw ConfigError("no records to summarize");
  Summary s = kind_of(c.kind).summary(c, records);
  Summary out;
  out.values["kind"] = c.kind;
  out.values["records"] = records.size();
  for (auto it = s.values.begin(); it != s.values.end(); ++it) out.values[it.key()] = std::move(it.value());
  out.series = std::move(s.series);
  return out;
}

void run_samples(const ExperimentConfig& c, int threads, const std::function<void(Record&&)>& sink) {
  kind_of(c.kind);
  const long n = c.samples;
  if (threads <= 1) {
    for (long i = 0; i < n; ++i) sink(run_sample(c, i));
    return;
  }
  struct Slot {
    std::optional<Record> record;
    std::exception_ptr error;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(n));
  std::mutex mu;
  std::condition_variable ready;
  std::atomic<long> next{0};
  std::atomic<bool> stop{false};

  auto worker = [&] {
    while (!stop) {
      const long i = next++;
      if (i >= n) return;
      Slot s;
      try {
        s.record = run_sample(c, i);
      } catch (...) {
        s.error = std::current_exception();
        stop = true;
      }
      {
        std::lock_guard<std::mutex> lock(mu);
        slots[static_cast<std::size_t>(i)] = std::move(s);
      }
      ready.notify_all();
    }
  };
  std::vector<std::jthread> pool;
  const int workers = static_cast<int>(std::min<long>(threads, n));
  for (int t = 0; t < workers; ++t) pool.emplace_back(worker);

  // Indices below a failing one were claimed before it, so every slot
  // visited here is eventually filled.
  std::exception_ptr failure;
  for (long i = 0; i < n && !failure; ++i) {
    Slot s;
    {
      std::unique_lock<std::mutex> lock(mu);
      auto& slot = slots[static_cast<std::size_t>(i)];
      ready.wait(lock, [&] { return slot.record || slot.error; });
      s = std::move(slot);
    }
    if (s.error) {
      failure = s.error;
      continue;
    }
    try {
      sink(std::move(*s.record));
    } catch (...) {
      failure = std::current_exception();
    }
  }
  stop = true;
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

std::vector<Record> collect_samples(const ExperimentConfig& c, int threads) {
  std::vector<Record> out;
  out.reserve(static_cast<std::size_t>(c.samples));
  run_samples(c, threads, [&](Record&& r) { out.push_back(std::move(r)); });
  return out;
}

std::size_t shared_driving_sites(const CubeSpec& a, const CubeSpec& b, int fold) {
  const auto sa = driving_sites(a, fold);
  const auto sb = driving_sites(b, fold);
  const std::set<std::vector<int>> first(sa.begin(), sa.end());
  return static_cast<std::size_t>(std::count_if(sb.begin(), sb.end(), [&](const auto& s) { return first.count(s); }));
}

}  // namespace mploc
