from .anova import (AnovaRow, AnovaTable, FactorialData, balance_by_duplication,
                    sums_of_squares, two_way_anova)
from .distributions import (FISHER_F, STUDENT_T, betainc, dist_quantile, dist_tail,
                            f_critical, f_tail, t_critical_two_tailed, t_tail)
from .ttest import TTestResult, one_sample_t

__all__ = [
    "AnovaRow", "AnovaTable", "FactorialData", "balance_by_duplication",
    "sums_of_squares", "two_way_anova", "FISHER_F", "STUDENT_T", "betainc",
    "dist_quantile", "dist_tail", "f_critical", "f_tail", "t_critical_two_tailed",
    "t_tail", "TTestResult", "one_sample_t",
]
