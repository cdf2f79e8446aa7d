#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include <omp.h>

#include "causalrisk/descend.hpp"
#include "causalrisk/harness.hpp"
#include "causalrisk/learners.hpp"
#include "causalrisk/rng.hpp"

using namespace causalrisk;

namespace {

double seconds(const std::function<void()>& work, int repeats) {
  const auto start = std::chrono::steady_clock::now();
  for (int r = 0; r < repeats; ++r) work();
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  return elapsed.count() / repeats;
}

void line(const char* name, double serial, double parallel) {
  std::printf("%-22s serial %9.4f s   openmp %9.4f s   speedup %5.2fx\n", name, serial, parallel, serial / parallel);
}

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng = make_stream(seed, 0);
  std::normal_distribution<double> z;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = z(rng);
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  const int jobs = argc > 1 ? std::stoi(argv[1]) : omp_get_max_threads();
  omp_set_num_threads(jobs);
  std::printf("threads: %d\n", jobs);

  const Eigen::MatrixXd reference = gaussian(2000, 200, 1);
  const Eigen::MatrixXd treated = gaussian(2000, 200, 2);
  line("column_statistics", seconds([&] { column_statistics_serial(reference, treated, 0); }, 20),
       seconds([&] { column_statistics(reference, treated, 0); }, 20));

  const Eigen::MatrixXd data = gaussian(5000, 200, 3);
  line("correlation_matrix", seconds([&] { correlation_matrix_serial(data); }, 3),
       seconds([&] { correlation_matrix(data); }, 3));

  GridConfig config;
  config.settings = 8;
  config.space.p = {25};
  config.space.n_int = {100};
  config.learners = {parse_learner_spec("greedy-bic"), parse_learner_spec("empty")};
  line("run_grid (8 settings)", seconds([&] { run_grid_serial(config, 11); }, 1),
       seconds([&] { run_grid(config, 11, jobs); }, 1));
  return 0;
}
