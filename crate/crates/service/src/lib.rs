//! Interactive control of simulation sessions over HTTP.
//!
//! | Method | Path | |
//! |---|---|---|
//! | `POST` | `/sessions` | create from uploaded scenario files and config |
//! | `POST` | `/sessions/{id}/control` | `{"command": "play" \| "pause" \| "step" \| "reset" \| "set_speed" \| "set_policy" \| "set_queue_size", ...}` |
//! | `GET` | `/sessions/{id}/state` | snapshot |
//! | `GET` | `/sessions/{id}/report?kind=task\|machine\|summary\|full` | CSV, finished sessions only |
//! | `GET` | `/sessions/{id}/log` | applied events as CSV |
//! | `GET` | `/sessions/{id}/events` | server-sent event stream |
//! | `POST` | `/sessions/{id}/scenario` | replace files before the run starts |
//! | `GET` | `/policies` | registered policies |

mod error;
mod http;
mod session;

use std::sync::Arc;
use std::time::Duration;

use hcsim_core::PolicyRegistry;
use tokio::net::TcpListener;

pub use error::ServiceError;
pub use http::{router, AppState};
pub use session::{
    parse_queue_size, Command, CreateRequest, SessionManager, SessionMode, SessionState, StreamMessage,
    DEFAULT_IDLE_TIMEOUT,
};

/// Serves the API on an already-bound listener until the future is dropped
/// or the server fails. Idle sessions are swept in the background.
pub async fn serve(listener: TcpListener, registry: PolicyRegistry, idle_timeout: Duration) -> std::io::Result<()> {
    let manager = Arc::new(SessionManager::new(registry, idle_timeout));
    let sweeper = Arc::clone(&manager);
    let period = (idle_timeout / 4).clamp(Duration::from_millis(100), Duration::from_secs(60));
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(period);
        loop {
            tick.tick().await;
            sweeper.evict_idle();
        }
    });
    axum::serve(listener, router(manager)).await
}
