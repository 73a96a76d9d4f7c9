// Copyright 2026 The RuleLens Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// HTTP service: dataset upload, a single-worker fit queue, and report, trace
// and inconsistency queries. Datasets and reports live in a content-addressed
// store on disk; job records are persisted next to them so a restarted server
// still lists earlier jobs.

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <thread>

#include <json.hpp>

#include "rulelens/audit.hpp"
#include "rulelens/dataset.hpp"
#include "rulelens/error.hpp"
#include "rulelens/fitting.hpp"
#include "rulelens/report.hpp"

// After Eigen: httplib pulls in <resolv.h>, whose _res macro clashes with
// Eigen parameter names.
#include <httplib.h>

namespace rulelens {

/// 64-bit FNV-1a as 16 lowercase hex digits.
inline std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::filesystem::path default_data_dir() {
  const char* env = std::getenv("RULELENS_DATA_DIR");
  return env != nullptr && *env != '\0' ? std::filesystem::path(env) : std::filesystem::path("rulelens-data");
}

/// Content-addressed blobs under <root>/<kind>/<hash><ext>.
class Store {
 public:
  explicit Store(std::filesystem::path root) : root_(std::move(root)) {
    for (const char* sub : {"datasets", "reports", "jobs"}) std::filesystem::create_directories(root_ / sub);
  }

  const std::filesystem::path& root() const { return root_; }

  std::string put_dataset(std::string_view bytes) { return put("datasets", ".csv", bytes); }
  std::string put_report(std::string_view bytes) { return put("reports", ".json", bytes); }
  std::optional<std::string> dataset(const std::string& id) const { return get("datasets", ".csv", id); }
  std::optional<std::string> report(const std::string& id) const { return get("reports", ".json", id); }

  void put_job(const std::string& id, const std::string& json) const {
    write_atomic(root_ / "jobs" / (id + ".json"), json);
  }

  std::vector<std::string> job_files() const {
    std::vector<std::string> out;
    for (const auto& e : std::filesystem::directory_iterator(root_ / "jobs")) {
      if (e.path().extension() == ".json") out.push_back(read_file(e.path().string()));
    }
    return out;
  }

 private:
  static bool valid_id(const std::string& id) {
    return id.size() == 16 && id.find_first_not_of("0123456789abcdef") == std::string::npos;
  }

  static void write_atomic(const std::filesystem::path& path, std::string_view bytes) {
    const auto tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw InternalError("cannot write '" + tmp + "'");
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    std::filesystem::rename(tmp, path);
  }

  std::string put(const char* kind, const char* ext, std::string_view bytes) {
    const std::string id = fnv1a_hex(bytes);
    const auto path = root_ / kind / (id + ext);
    std::lock_guard lock(mu_);
    if (!std::filesystem::exists(path)) write_atomic(path, bytes);
    return id;
  }

  std::optional<std::string> get(const char* kind, const char* ext, const std::string& id) const {
    if (!valid_id(id)) return std::nullopt;
    const auto path = root_ / kind / (id + ext);
    if (!std::filesystem::exists(path)) return std::nullopt;
    return read_file(path.string());
  }

  std::filesystem::path root_;
  std::mutex mu_;
};

enum class JobState { queued, running, done, failed };

inline const char* to_string(JobState s) {
  switch (s) {
    case JobState::queued: return "queued";
    case JobState::running: return "running";
    case JobState::done: return "done";
    case JobState::failed: return "failed";
  }
  return "unknown";
}

inline JobState parse_job_state(const std::string& s) {
  for (auto st : {JobState::queued, JobState::running, JobState::done, JobState::failed}) {
    if (s == to_string(st)) return st;
  }
  throw ValidationError("unknown job state '" + s + "'");
}

struct JobRecord {
  std::string id;
  std::uint64_t seq = 0;
  JobState state = JobState::queued;
  std::string dataset_id;
  PipelineConfig config;
  std::string report_id;
  std::string error;
  std::string error_kind;  // "validation" or "internal" for failed jobs
};

inline Json job_to_json(const JobRecord& job) {
  Json j;
  j["job_id"] = job.id;
  j["seq"] = job.seq;
  j["state"] = to_string(job.state);
  j["dataset_id"] = job.dataset_id;
  j["config"] = config_to_json(job.config);
  j["report_id"] = job.report_id.empty() ? Json(nullptr) : Json(job.report_id);
  j["error"] = job.error.empty() ? Json(nullptr) : Json(job.error);
  if (!job.error_kind.empty()) j["error_kind"] = job.error_kind;
  return j;
}

inline JobRecord job_from_json(const Json& j) {
  JobRecord job;
  job.id = j.at("job_id").get<std::string>();
  job.seq = j.at("seq").get<std::uint64_t>();
  job.state = parse_job_state(j.at("state").get<std::string>());
  job.dataset_id = j.at("dataset_id").get<std::string>();
  job.config = config_from_json(j.at("config"));
  if (!j.at("report_id").is_null()) job.report_id = j.at("report_id").get<std::string>();
  if (!j.at("error").is_null()) job.error = j.at("error").get<std::string>();
  if (j.contains("error_kind")) job.error_kind = j.at("error_kind").get<std::string>();
  return job;
}

/// Dataset summary returned on upload.
inline Json dataset_summary(const std::string& id, const Dataset& typed) {
  Json cols = Json::array();
  for (const auto& c : typed.columns()) {
    Json cj{{"name", c.name}, {"kind", to_string(c.kind)}};
    if (c.continuous()) {
      cj["min"] = c.min;
      cj["max"] = c.max;
    } else {
      cj["values"] = c.categories;
    }
    cols.push_back(std::move(cj));
  }
  return Json{{"dataset_id", id}, {"columns", std::move(cols)}, {"n", typed.n()}};
}

/// Job table plus the single fit worker.
class JobQueue {
 public:
  explicit JobQueue(Store& store) : store_(store) {
    for (const auto& text : store_.job_files()) {
      JobRecord job;
      try {
        job = job_from_json(Json::parse(text));
      } catch (const std::exception&) {
        continue;  // a torn or foreign file; not ours to repair
      }
      if (job.state == JobState::running) {
        job.state = JobState::failed;
        job.error = "interrupted by a server restart";
        job.error_kind = "internal";
        store_.put_job(job.id, job_to_json(job).dump(2));
      }
      next_seq_ = std::max(next_seq_, job.seq + 1);
      jobs_[job.id] = job;
    }
    std::vector<const JobRecord*> pending;
    for (const auto& [id, job] : jobs_) {
      if (job.state == JobState::queued) pending.push_back(&job);
    }
    std::sort(pending.begin(), pending.end(), [](auto* a, auto* b) { return a->seq < b->seq; });
    for (const auto* job : pending) queue_.push_back(job->id);
    worker_ = std::jthread([this](std::stop_token st) { run(st); });
  }

  ~JobQueue() {
    worker_.request_stop();
    cv_.notify_all();
  }

  JobQueue(const JobQueue&) = delete;
  JobQueue& operator=(const JobQueue&) = delete;

  std::string submit(const std::string& dataset_id, const PipelineConfig& config) {
    std::lock_guard lock(mu_);
    JobRecord job;
    job.seq = next_seq_++;
    char buf[32];
    std::snprintf(buf, sizeof buf, "job-%06llu", static_cast<unsigned long long>(job.seq));
    job.id = buf;
    job.dataset_id = dataset_id;
    job.config = config;
    store_.put_job(job.id, job_to_json(job).dump(2));
    jobs_[job.id] = job;
    queue_.push_back(job.id);
    cv_.notify_all();
    return job.id;
  }

  std::optional<JobRecord> get(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = jobs_.find(id);
    if (it == jobs_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<JobRecord> list() const {
    std::lock_guard lock(mu_);
    std::vector<JobRecord> out;
    for (const auto& [id, job] : jobs_) out.push_back(job);
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.seq < b.seq; });
    return out;
  }

  /// Blocks until the job leaves queued/running; for tests and the CLI.
  std::optional<JobRecord> wait(const std::string& id) const {
    std::unique_lock lock(mu_);
    if (!jobs_.count(id)) return std::nullopt;
    done_cv_.wait(lock, [&] {
      const auto s = jobs_.at(id).state;
      return s == JobState::done || s == JobState::failed;
    });
    return jobs_.at(id);
  }

 private:
  void update(const JobRecord& job) {
    store_.put_job(job.id, job_to_json(job).dump(2));
    jobs_[job.id] = job;
    done_cv_.notify_all();
  }

  void run(std::stop_token st) {
    for (;;) {
      JobRecord job;
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return st.stop_requested() || !queue_.empty(); });
        if (st.stop_requested()) return;
        job = jobs_.at(queue_.front());
        queue_.pop_front();
        job.state = JobState::running;
        update(job);
      }
      try {
        const auto bytes = store_.dataset(job.dataset_id);
        if (!bytes) throw ValidationError("unknown dataset '" + job.dataset_id + "'");
        const FitReport report = fit_pipeline(load_csv(*bytes), job.config);
        job.report_id = store_.put_report(dump_report(report));
        job.state = JobState::done;
      } catch (const Error& e) {
        job.state = JobState::failed;
        job.error = e.what();
        job.error_kind = e.kind() == ErrorKind::validation ? "validation" : "internal";
      } catch (const std::exception& e) {
        job.state = JobState::failed;
        job.error = e.what();
        job.error_kind = "internal";
      }
      std::lock_guard lock(mu_);
      update(job);
    }
  }

  Store& store_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  mutable std::condition_variable done_cv_;
  std::map<std::string, JobRecord> jobs_;
  std::deque<std::string> queue_;
  std::uint64_t next_seq_ = 1;
  std::jthread worker_;  // last: joins before the members it uses go away
};

inline const char* kFallbackPage = R"(<!doctype html>
<html lang="en">
<head><meta charset="utf-8"><title>RuleLens</title></head>
<body>
<h1>RuleLens</h1>
<p>The web UI assets are not installed. The JSON API is available under <code>/api</code>:</p>
<ul>
<li><code>POST /api/datasets</code> (multipart field <code>file</code>)</li>
<li><code>POST /api/jobs</code> with <code>{"dataset_id": ..., "config": {...}}</code></li>
<li><code>GET /api/jobs/{id}</code>, <code>/report</code>, <code>/trace?rule=...&amp;top=10</code>,
<code>/inconsistencies?beta_threshold=0&amp;only_significant=false</code></li>
</ul>
</body>
</html>
)";

struct ServiceOptions {
  std::filesystem::path data_dir = default_data_dir();
  std::optional<std::filesystem::path> static_dir;
};

/// The HTTP API bound to a store and job queue. Owns neither the socket loop
/// nor the port; call listen() or use server() directly.
class Service {
 public:
  explicit Service(ServiceOptions options = {})
      : options_(std::move(options)), store_(options_.data_dir), jobs_(store_) {
    routes();
  }

  httplib::Server& server() { return server_; }
  JobQueue& jobs() { return jobs_; }
  Store& store() { return store_; }

  bool listen(const std::string& host, int port) { return server_.listen(host, port); }
  int bind_any_port(const std::string& host) { return server_.bind_to_any_port(host); }
  bool listen_after_bind() { return server_.listen_after_bind(); }
  void stop() { server_.stop(); }

 private:
  static void send_json(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(2) + "\n", "application/json; charset=utf-8");
  }

  static void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
    send_json(res, status, Json{{"error", {{"code", code}, {"message", message}}}});
  }

  template <typename F>
  static httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const ValidationError& e) {
        send_error(res, 400, "validation", e.what());
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::validation) {
          send_error(res, 400, "validation", e.what());
        } else {
          send_error(res, 500, "internal", e.what());
        }
      } catch (const nlohmann::json::exception& e) {
        send_error(res, 400, "validation", std::string("bad JSON: ") + e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
      }
    };
  }

  JobRecord find_job(const std::string& id, httplib::Response& res, bool& ok) const {
    auto job = jobs_.get(id);
    ok = job.has_value();
    if (!ok) send_error(res, 404, "not_found", "unknown job '" + id + "'");
    return job.value_or(JobRecord{});
  }

  /// The finished report of a job, or an error response.
  std::optional<std::string> finished_report(const std::string& id, httplib::Response& res) const {
    bool ok = false;
    const JobRecord job = find_job(id, res, ok);
    if (!ok) return std::nullopt;
    if (job.state != JobState::done) {
      send_error(res, 409, "not_ready", "job '" + id + "' is " + to_string(job.state));
      return std::nullopt;
    }
    auto bytes = store_.report(job.report_id);
    if (!bytes) throw InternalError("report '" + job.report_id + "' missing from the store");
    return bytes;
  }

  void routes() {
    server_.Post("/api/datasets", guarded([this](const httplib::Request& req, httplib::Response& res) {
      std::string bytes;
      if (req.is_multipart_form_data()) {
        if (req.has_file("file")) {
          bytes = req.get_file_value("file").content;
        } else if (!req.files.empty()) {
          bytes = req.files.begin()->second.content;
        } else {
          throw ValidationError("multipart upload has no file part");
        }
      } else {
        bytes = req.body;
      }
      const Dataset typed = infer_kinds(load_csv(bytes));
      const std::string id = store_.put_dataset(bytes);
      send_json(res, 201, dataset_summary(id, typed));
    }));

    server_.Get(R"(/api/datasets/([0-9a-f]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      auto bytes = store_.dataset(id);
      if (!bytes) return send_error(res, 404, "not_found", "unknown dataset '" + id + "'");
      send_json(res, 200, dataset_summary(id, infer_kinds(load_csv(*bytes))));
    }));

    server_.Post("/api/jobs", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const Json body = Json::parse(req.body);
      if (!body.is_object()) throw ValidationError("request body must be a JSON object");
      const std::string dataset_id = detail::get_field<std::string>(body, "dataset_id");
      Json cfg;
      if (body.contains("config")) {
        cfg = body.at("config");
      } else {
        cfg = body;
        cfg.erase("dataset_id");
      }
      const PipelineConfig config = config_from_json(cfg);
      config.validate();
      if (!store_.dataset(dataset_id)) return send_error(res, 404, "not_found", "unknown dataset '" + dataset_id + "'");
      const std::string id = jobs_.submit(dataset_id, config);
      send_json(res, 202, Json{{"job_id", id}});
    }));

    server_.Get("/api/jobs", guarded([this](const httplib::Request&, httplib::Response& res) {
      Json out = Json::array();
      for (const auto& job : jobs_.list()) out.push_back(job_to_json(job));
      send_json(res, 200, out);
    }));

    server_.Get(R"(/api/jobs/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      bool ok = false;
      const JobRecord job = find_job(req.matches[1], res, ok);
      if (!ok) return;
      Json out = job_to_json(job);
      if (job.state == JobState::done) {
        auto bytes = store_.report(job.report_id);
        if (!bytes) throw InternalError("report '" + job.report_id + "' missing from the store");
        out["report"] = Json::parse(*bytes);
      }
      send_json(res, 200, out);
    }));

    // Exact report bytes, identical to what `rulelens fit` writes.
    server_.Get(R"(/api/jobs/([^/]+)/report)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto bytes = finished_report(req.matches[1], res);
      if (!bytes) return;
      res.status = 200;
      res.set_content(*bytes, "application/json; charset=utf-8");
    }));

    server_.Get(R"(/api/jobs/([^/]+)/trace)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto bytes = finished_report(req.matches[1], res);
      if (!bytes) return;
      if (!req.has_param("rule")) throw ValidationError("query parameter 'rule' is required");
      std::size_t top = 10;
      if (req.has_param("top")) {
        const auto v = parse_real(req.get_param_value("top"));
        if (!v || *v < 1 || *v != std::floor(*v)) throw ValidationError("top must be a positive integer");
        top = static_cast<std::size_t>(*v);
      }
      const bool include_intercept =
          !req.has_param("include_intercept") || req.get_param_value("include_intercept") != "false";
      const FitReport report = parse_report(*bytes);
      const JobRecord job = *jobs_.get(req.matches[1]);
      const Dataset data = load_csv(*store_.dataset(job.dataset_id));
      const std::string rule = req.get_param_value("rule");
      if (report.find(rule) == nullptr) return send_error(res, 404, "not_found", "unknown rule '" + rule + "'");
      std::vector<std::string> header;
      for (const auto& c : data.columns()) header.push_back(c.name);
      const auto entries = trace_rule(report, rule, data, top, include_intercept);
      send_json(res, 200, trace_to_json(entries, header));
    }));

    server_.Get(R"(/api/jobs/([^/]+)/inconsistencies)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  auto bytes = finished_report(req.matches[1], res);
                  if (!bytes) return;
                  ConsistencyFilter filter;
                  if (req.has_param("beta_threshold")) {
                    const auto v = parse_real(req.get_param_value("beta_threshold"));
                    if (!v || *v < 0) throw ValidationError("beta_threshold must be a real >= 0");
                    filter.beta_threshold = *v;
                  }
                  if (req.has_param("alpha")) {
                    const auto v = parse_real(req.get_param_value("alpha"));
                    if (!v || !(*v > 0 && *v < 1)) throw ValidationError("alpha must be in (0, 1)");
                    filter.alpha = *v;
                  }
                  if (req.has_param("only_significant")) {
                    const std::string v = req.get_param_value("only_significant");
                    if (v != "true" && v != "false" && v != "1" && v != "0") {
                      throw ValidationError("only_significant must be true or false");
                    }
                    filter.require_significant = v == "true" || v == "1";
                  }
                  const FitReport report = parse_report(*bytes);
                  send_json(res, 200, inconsistencies_to_json(find_inconsistencies(audit_rules(report), filter)));
                }));

    if (options_.static_dir && std::filesystem::is_directory(*options_.static_dir)) {
      server_.set_mount_point("/", options_.static_dir->string());
    } else {
      server_.Get("/", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(kFallbackPage, "text/html; charset=utf-8");
      });
    }
  }

  ServiceOptions options_;
  Store store_;
  JobQueue jobs_;
  httplib::Server server_;
};

}  // namespace rulelens
