// Runs a toy Monte-Carlo campaign of the random-code construction and checks
// the empirical error rates against the analytical bounds.

#include <cstdio>

#include "ara/bounds.hpp"
#include "ara/model.hpp"
#include "ara/simulator.hpp"

int main() {
  const ara::CorrelationModel m =
      ara::CorrelationModel::with_count(0.3, 0.15, 0.6, 8, 4, 8);
  const ara::ChannelConfig cfg{200, 0.08, ara::pos_inf};
  ara::ExponentSearchConfig search;
  search.rho_grid = 24;
  search.refine_iters = 20;

  const long long trials = 5000;
  const ara::TrialTally tally = ara::run_campaign(m, cfg, trials, 42);
  const ara::BoundSet bs = ara::eps_bounds(m, cfg, search);

  std::printf("%lld trials (alarm in %lld, quiet in %lld)\n", tally.trials,
              tally.alarm_trials, tally.no_alarm_trials);
  auto line = [](const char* name, double emp, double bound, double den) {
    const double hw = ara::wilson_halfwidth(emp, den);
    std::printf("%-18s empirical %.4f  bound %.4f  wilson +/- %.4f  %s\n", name, emp,
                bound, hw, emp <= bound + hw ? "ok" : "VIOLATED");
  };
  line("alarm missed", tally.alarm_missed_rate(), bs.eps_a_bound,
       static_cast<double>(tally.alarm_trials));
  line("false positive", tally.false_positive_rate(), bs.eps_fp_bound,
       static_cast<double>(tally.no_alarm_trials));
  line("std error (quiet)", tally.std_error_rate_no_alarm(), bs.eps_s_bound,
       static_cast<double>(tally.no_alarm_trials));
  line("std error (alarm)", tally.std_error_rate_alarm(), bs.eps_sa_bound,
       static_cast<double>(tally.alarm_trials));
  std::printf("alarm-count misestimate rate %.4f over %lld resolved alarms\n",
              tally.ka_misestimate_rate(), tally.ka_correct_alarm);
  return 0;
}
