"""Fixed-priority global scheduling toolkit.

Taskset generation, schedulability tests (exact uniprocessor RTA, global
limited-carry-in RTA and its deadline-window variant), priority-assignment
heuristics and Audsley's algorithm, enumeration oracles, a falsifying
simulator, an evaluation service for reward-driven trainers, and an
experiment harness.
"""

from .model import (PriorityOrder, Task, TaskSet, load, load_many, save,
                    save_many, taskset_hash, validate)
from .generate import GenConfig, child_seed, gen_taskset, gen_tasksets, gen_utilizations
from .rta import (DA_LC, RTA_LC, RTA_UNI, PartialState, TestVerdict, da_lc,
                  new_partial_state, rta_lc, rta_lc_incremental,
                  rta_uniprocessor, workload_ci, workload_nc)
from .assign import (AssignResult, assign_heuristic, dkc_factor,
                     exhaustive_search, heuristic_order, opa, sampled_fraction)
from .sim import ArrivalPattern, SimResult, default_horizon, falsify, simulate
from .experiments import (ExperimentConfig, Table1Config, replicate_table1,
                          run_experiment)

__version__ = "0.1.0"
