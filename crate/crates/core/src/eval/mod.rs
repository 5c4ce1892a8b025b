//! Sweeps, EVM reporting, RMa path loss and the coverage link budget.

mod budget;
mod evm;
mod pathloss;
mod sweep;

pub use budget::{link_budget, BudgetColumn, BudgetRow, LinkBudgetParams, LinkBudgetReport, THERMAL_NOISE_DBM_HZ};
pub use evm::{evm_csv, report_evm, EvmRow};
pub use pathloss::{invert_path_loss, rma_path_loss, RmaParams, MAX_DISTANCE_LOS_M, MAX_DISTANCE_NLOS_M, MIN_DISTANCE_M};
pub use sweep::{
    backoff_sweep_csv, ber_at, ber_sweep_csv, load_receiver, load_receivers, required_snr, run_backoff_sweep, run_ber_sweep,
    BackoffSweepRow, BerSweepRow, ReceiverName, SweepReceiver, SweepSpec,
};
