#include "rgsr/benchmark.hpp"

#include "rgsr/metrics.hpp"
#include "rgsr/stats.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace rgsr::synth {

namespace {

ScanRecord record_from(const ScanPair& pair, pipeline::Method method,
                       const pipeline::PipelineResult& result, double cascade_rmse) {
  ScanRecord rec;
  rec.id = pair.id;
  rec.site = pair.site;
  rec.method = pipeline::method_name(method);
  rec.transform = result.final.transform;
  rec.score = result.final.score;
  rec.stage = result.final.label;
  rec.rmse_cascade = cascade_rmse;
  for (const auto& h : result.trace) {
    rec.trace.push_back({h.label, h.score.rmse, h.accepted});
  }
  if (!result.trace.empty() && result.trace.front().label == "ctf") {
    rec.rmse_ctf = result.trace.front().score.rmse;
  }
  if (!pair.markers.empty()) rec.tre = metrics::tre(result.final.transform, pair.markers);
  return rec;
}

}  // namespace

std::vector<ScanRecord> run_benchmark(std::span<const ScanPair> pairs, pipeline::Method method,
                                      const pipeline::GateConfig& gates) {
  std::vector<ScanRecord> records(pairs.size());
  const std::int64_t n = static_cast<std::int64_t>(pairs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    const ScanPair& pair = pairs[i];
    const auto started = std::chrono::steady_clock::now();
    try {
      pipeline::PairRunner runner(pair, gates);
      double cascade_rmse = std::numeric_limits<double>::quiet_NaN();
      pipeline::PipelineResult result;
      switch (method) {
        case pipeline::Method::kCtf:
          result = runner.run_ctf();
          break;
        case pipeline::Method::kTwoStage:
          result = runner.run_two_stage();
          break;
        case pipeline::Method::kCascade:
          result = runner.run_cascade();
          cascade_rmse = result.final.score.rmse;
          break;
        case pipeline::Method::kRgsr:
        case pipeline::Method::kRgsrFm: {
          const pipeline::PipelineResult cascade_out = runner.run_cascade();
          cascade_rmse = cascade_out.final.score.rmse;
          result = runner.run_rgsr(cascade_out);
          if (method == pipeline::Method::kRgsrFm) {
            result = runner.run_fm_extension(result, true);
          }
          break;
        }
      }
      records[i] = record_from(pair, method, result, cascade_rmse);
      records[i].wall_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
              .count();
    } catch (const std::exception& e) {
      ScanRecord rec;
      rec.id = pair.id;
      rec.site = pair.site;
      rec.method = pipeline::method_name(method);
      rec.error = true;
      rec.error_msg = e.what();
      records[i] = rec;
    }
  }
  return records;
}

BenchmarkTable summarize(std::span<const ScanRecord> records, std::span<const ScanPair> pairs) {
  BenchmarkTable table;

  std::vector<std::string> site_order;
  std::map<std::string, std::vector<const ScanRecord*>> by_site;
  for (const ScanRecord& r : records) {
    if (by_site.find(r.site) == by_site.end()) site_order.push_back(r.site);
    by_site[r.site].push_back(&r);
    if (!r.error) table.stage_histogram[r.stage] += 1;
  }

  std::map<std::string, std::vector<const ScanPair*>> pairs_by_site;
  for (const ScanPair& p : pairs) pairs_by_site[p.site].push_back(&p);

  auto make_row = [&](const std::string& site,
                      const std::vector<const ScanRecord*>& recs) -> SiteRow {
    SiteRow row;
    row.site = site;
    std::vector<metrics::InlierScore> scores;
    std::vector<double> rmses, tres;
    for (const ScanRecord* r : recs) {
      if (r->error) continue;
      ++row.n;
      scores.push_back(r->score);
      rmses.push_back(r->score.rmse);
      if (std::isfinite(r->tre)) tres.push_back(r->tre);
      if (!std::isnan(r->rmse_ctf) && r->score.rmse > r->rmse_ctf) ++row.regressions_vs_ctf;
      if (!std::isnan(r->rmse_cascade) && r->score.rmse > r->rmse_cascade) {
        ++row.regressions_vs_cascade;
      }
    }
    if (row.n == 0) return row;
    row.s050 = metrics::success_at(scores, 0.5);
    row.s075 = metrics::success_at(scores, 0.75);
    row.s100 = metrics::success_at(scores, 1.0);
    row.median_rmse = stats::median(rmses);
    if (!tres.empty()) row.median_tre = stats::median(std::move(tres));
    return row;
  };

  for (const std::string& site : site_order) {
    SiteRow row = make_row(site, by_site[site]);
    // LMCE over the site's trajectory, id order.
    auto it = pairs_by_site.find(site);
    if (it != pairs_by_site.end() && it->second.size() >= 2) {
      std::vector<const ScanPair*> sorted_pairs = it->second;
      std::sort(sorted_pairs.begin(), sorted_pairs.end(),
                [](const ScanPair* a, const ScanPair* b) { return a->id < b->id; });
      std::map<int, const ScanRecord*> rec_by_id;
      for (const ScanRecord* r : by_site[site]) {
        if (!r->error) rec_by_id[r->id] = r;
      }
      std::vector<RigidTransform> refined, odom;
      for (const ScanPair* p : sorted_pairs) {
        auto rit = rec_by_id.find(p->id);
        if (rit == rec_by_id.end()) continue;
        refined.push_back(rit->second->transform);
        odom.push_back(p->odom);
      }
      if (refined.size() >= 2) {
        row.lmce_median = stats::median(metrics::lmce(refined, odom));
      }
    }
    table.sites.push_back(std::move(row));
  }

  SiteRow all = make_row("ALL", [&] {
    std::vector<const ScanRecord*> flat;
    for (const ScanRecord& r : records) flat.push_back(&r);
    return flat;
  }());
  table.sites.push_back(std::move(all));
  return table;
}

}  // namespace rgsr::synth
