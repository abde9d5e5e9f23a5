//! In-process transport: the client-facing [`SessionTransport`] trait served
//! directly by a [`Store`], bypassing HTTP while exercising the identical
//! message schema and error mapping.

use std::sync::Arc;

use hunl_core::aivat::AivatReport;
use hunl_core::protocol::{
    ActionRequest, CreateSessionRequest, CreateSessionResponse, GameStateMessage,
    LeaderboardEntry, SessionTransport, TransportError,
};

use crate::{ServiceError, Store};

pub struct LocalTransport {
    store: Arc<Store>,
}

impl LocalTransport {
    pub fn new(store: Arc<Store>) -> LocalTransport {
        LocalTransport { store }
    }

    pub fn store(&self) -> &Arc<Store> {
        &self.store
    }
}

fn to_transport(e: ServiceError) -> TransportError {
    TransportError::Service {
        status: e.status(),
        body: e.body(),
    }
}

impl SessionTransport for LocalTransport {
    fn create_session(
        &mut self,
        req: &CreateSessionRequest,
    ) -> Result<CreateSessionResponse, TransportError> {
        self.store.create_session(req).map_err(to_transport)
    }

    fn get_state(&mut self, session_id: &str) -> Result<GameStateMessage, TransportError> {
        self.store.get_state(session_id).map_err(to_transport)
    }

    fn submit_action(
        &mut self,
        session_id: &str,
        req: &ActionRequest,
    ) -> Result<GameStateMessage, TransportError> {
        self.store.submit_action(session_id, req).map_err(to_transport)
    }

    fn get_metrics(&mut self, session_id: &str) -> Result<AivatReport, TransportError> {
        self.store.metrics(session_id).map_err(to_transport)
    }

    fn get_leaderboard(&mut self) -> Result<Vec<LeaderboardEntry>, TransportError> {
        self.store.leaderboard().map_err(to_transport)
    }
}
