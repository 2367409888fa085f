// Library walkthrough: generate a cohort, fit, inspect, predict, save.

#include <cstdio>

#include "jointsel/jointsel.hpp"

int main() {
  using namespace jointsel;

  SynthConfig cfg;
  cfg.d = 60;
  cfg.seed = 1;
  const SyntheticData data = generate_synthetic(cfg);

  Hyperparams hp;
  hp.lambda = 1.0;
  hp.k = 50;
  const FitReport report = fit(data.dataset, hp);
  std::printf("%s after %d iterations, objective %.6g\n",
              report.converged ? "converged" : "stopped", report.iterations,
              report.objective_trace.back());
  for (const auto& w : report.warnings) std::printf("warning: %s\n", w.c_str());

  const auto ranking = feature_ranking(report.model);
  std::printf("top features:");
  for (std::size_t r = 0; r < 5; ++r) std::printf(" %s", ranking[r].name.c_str());
  std::printf("\n");

  const Vector x = data.dataset.features.col(0);
  const ClassPrediction p = predict_class(report.model, x);
  std::printf("sample %s: label %+d, score %.3f, time %.2f days\n", data.dataset.ids[0].c_str(),
              p.label, p.score, predict_time(report.model, x));

  save_model(report.model, "quickstart_model.txt");
  return 0;
}
