//! Survey service: question banks over HTTP, participant sessions and a
//! durable answer store.

pub mod api;
pub mod bank;
pub mod store;

pub use api::{router, system_clock, AppState, Clock};
pub use bank::{load_banks, BankFile};
pub use store::{format_responses, parse_responses, Store, StoreError, StoreSettings};

use crate::config::ServiceSection;

impl From<&ServiceSection> for StoreSettings {
    fn from(s: &ServiceSection) -> Self {
        StoreSettings {
            answers_per_question: s.answers_per_question,
            questions_per_session: s.questions_per_session,
            idle_timeout_secs: s.idle_timeout_secs,
        }
    }
}

/// Loads banks and store from the config and serves until interrupted.
pub async fn serve(cfg: &ServiceSection) -> anyhow::Result<()> {
    let banks = load_banks(&cfg.bank_dir)?;
    let store = Store::open(&cfg.store_dir, banks, cfg.into())?;
    let state = AppState::new(store, system_clock());
    let app = router(state.clone(), cfg.static_dir.clone());
    let listener = tokio::net::TcpListener::bind(&cfg.bind).await?;
    eprintln!("serving on {}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    if let Ok(mut store) = state.store.write() {
        store.snapshot()?;
    }
    Ok(())
}
