use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Arc;

use parking_lot::Mutex;

use super::{Session, SessionConfig, SessionError, SessionParams, SessionView};
use crate::archive::{Archive, Published};
use crate::domains::Raster;

const EXPIRED_MEMORY: usize = 4096;

#[derive(Default)]
struct Expired {
    ids: HashSet<String>,
    order: VecDeque<String>,
}

impl Expired {
    fn remember(&mut self, id: String) {
        if self.ids.insert(id.clone()) {
            self.order.push_back(id);
        }
        while self.order.len() > EXPIRED_MEMORY {
            if let Some(old) = self.order.pop_front() {
                self.ids.remove(&old);
            }
        }
    }
}

/// Table of live sessions.
///
/// Each session sits behind its own lock, so work on one session never waits
/// on another. Per-session mutations are additionally guarded by the
/// `op_epoch` check in [`Session::step_select`].
pub struct SessionManager {
    archive: Arc<Archive>,
    config: SessionConfig,
    ttl_ms: u64,
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
    expired: Mutex<Expired>,
}

impl SessionManager {
    pub fn new(archive: Arc<Archive>, config: SessionConfig, ttl_ms: u64) -> Self {
        SessionManager {
            archive,
            config,
            ttl_ms,
            sessions: Mutex::new(HashMap::new()),
            expired: Mutex::new(Expired::default()),
        }
    }

    pub fn archive(&self) -> &Arc<Archive> {
        &self.archive
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn create(&self, params: &SessionParams) -> Result<SessionView, SessionError> {
        let session = Session::create(&self.archive, params, &self.config)?;
        let view = session.view();
        self.sessions
            .lock()
            .insert(session.session_id.clone(), Arc::new(Mutex::new(session)));
        Ok(view)
    }

    fn lookup(&self, session_id: &str) -> Result<Arc<Mutex<Session>>, SessionError> {
        let found = self.sessions.lock().get(session_id).cloned();
        let Some(session) = found else {
            return Err(if self.expired.lock().ids.contains(session_id) {
                SessionError::Expired(session_id.to_string())
            } else {
                SessionError::NotFound(session_id.to_string())
            });
        };
        let idle = crate::now_millis().saturating_sub(session.lock().last_activity);
        if idle > self.ttl_ms {
            self.sessions.lock().remove(session_id);
            self.expired.lock().remember(session_id.to_string());
            return Err(SessionError::Expired(session_id.to_string()));
        }
        Ok(session)
    }

    /// Runs `f` on a live session under its lock and refreshes its activity
    /// time.
    pub fn with_session<T>(
        &self,
        session_id: &str,
        f: impl FnOnce(&mut Session) -> Result<T, SessionError>,
    ) -> Result<T, SessionError> {
        let session = self.lookup(session_id)?;
        let mut s = session.lock();
        let out = f(&mut s)?;
        s.last_activity = crate::now_millis();
        Ok(out)
    }

    pub fn view(&self, session_id: &str) -> Result<SessionView, SessionError> {
        self.with_session(session_id, |s| Ok(s.view()))
    }

    pub fn select(&self, session_id: &str, op_epoch: u64, selected: &[usize]) -> Result<SessionView, SessionError> {
        self.with_session(session_id, |s| {
            s.step_select(op_epoch, selected)?;
            Ok(s.view())
        })
    }

    pub fn publish(&self, session_id: &str, index: usize, author: &str, tags: &[String]) -> Result<Published, SessionError> {
        let archive = self.archive.clone();
        self.with_session(session_id, |s| s.publish_candidate(&archive, index, author, tags))
    }

    /// `(domain_id, genome_blob)` of one candidate.
    pub fn candidate(&self, session_id: &str, index: usize) -> Result<(String, String), SessionError> {
        self.with_session(session_id, |s| Ok((s.domain_id.clone(), s.candidate(index)?.genome_blob.clone())))
    }

    pub fn render_candidate(&self, session_id: &str, index: usize, width: u32, height: u32) -> Result<Raster, SessionError> {
        let (domain_id, blob) = self.candidate(session_id, index)?;
        let domain = self
            .archive
            .registry()
            .domain(&domain_id)
            .cloned()
            .ok_or(SessionError::UnknownDomain(domain_id))?;
        Ok(domain.render(&blob, width, height)?)
    }

    pub fn delete(&self, session_id: &str) -> Result<(), SessionError> {
        self.lookup(session_id)?;
        self.sessions.lock().remove(session_id);
        Ok(())
    }

    /// Drops sessions idle for more than `ttl_ms` at time `now_ms`. Their
    /// unpublished candidates are gone for good.
    pub fn gc_sessions(&self, now_ms: u64, ttl_ms: u64) -> usize {
        let snapshot: Vec<(String, Arc<Mutex<Session>>)> =
            self.sessions.lock().iter().map(|(id, s)| (id.clone(), s.clone())).collect();
        let stale: Vec<String> = snapshot
            .into_iter()
            .filter(|(_, s)| now_ms.saturating_sub(s.lock().last_activity) > ttl_ms)
            .map(|(id, _)| id)
            .collect();
        let mut table = self.sessions.lock();
        let mut expired = self.expired.lock();
        let mut removed = 0;
        for id in stale {
            if table.remove(&id).is_some() {
                removed += 1;
                expired.remember(id);
            }
        }
        removed
    }

    /// [`gc_sessions`](Self::gc_sessions) with the manager's own ttl and clock.
    pub fn gc(&self) -> usize {
        self.gc_sessions(crate::now_millis(), self.ttl_ms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{DomainRegistry, BITSTRING_ID};

    fn manager(ttl_ms: u64) -> SessionManager {
        let archive = Arc::new(Archive::in_memory(Arc::new(DomainRegistry::with_builtins())));
        SessionManager::new(archive, SessionConfig::default(), ttl_ms)
    }

    #[test]
    fn gc_removes_only_idle_sessions() {
        let m = manager(u64::MAX);
        assert_eq!(m.gc_sessions(crate::now_millis(), 1000), 0);
        let v = m.create(&SessionParams::new(BITSTRING_ID).rng_seed(1)).unwrap();
        let now = crate::now_millis();
        assert_eq!(m.gc_sessions(now, 60_000), 0);
        assert!(m.view(&v.session_id).is_ok());
        assert_eq!(m.gc_sessions(now + 120_000, 60_000), 1);
        assert!(matches!(m.view(&v.session_id), Err(SessionError::Expired(_))));
        assert!(matches!(m.view("beef"), Err(SessionError::NotFound(_))));
    }

    #[test]
    fn lazy_expiry_on_access() {
        let m = manager(0);
        let v = m.create(&SessionParams::new(BITSTRING_ID).rng_seed(1)).unwrap();
        std::thread::sleep(std::time::Duration::from_millis(5));
        assert!(matches!(m.view(&v.session_id), Err(SessionError::Expired(_))));
        assert!(m.is_empty());
    }

    #[test]
    fn select_publish_delete() {
        let m = manager(60_000);
        let v = m.create(&SessionParams::new(BITSTRING_ID).rng_seed(2)).unwrap();
        let next = m.select(&v.session_id, 0, &[1, 2]).unwrap();
        assert_eq!((next.step, next.op_epoch), (1, 1));
        assert!(matches!(m.select(&v.session_id, 0, &[1]), Err(SessionError::StaleEpoch { .. })));
        let p = m.publish(&v.session_id, 0, "me", &[]).unwrap();
        assert!(p.created);
        let r = m.render_candidate(&v.session_id, 0, 8, 8).unwrap();
        assert_eq!(r.pixels().len(), 64);
        m.delete(&v.session_id).unwrap();
        assert!(matches!(m.view(&v.session_id), Err(SessionError::NotFound(_))));
    }

    #[test]
    fn concurrent_sessions_are_independent() {
        let m = Arc::new(manager(60_000));
        let handles: Vec<_> = (0..8)
            .map(|i| {
                let m = m.clone();
                std::thread::spawn(move || {
                    let v = m.create(&SessionParams::new(BITSTRING_ID).rng_seed(i)).unwrap();
                    for epoch in 0..20 {
                        m.select(&v.session_id, epoch, &[0]).unwrap();
                    }
                    m.publish(&v.session_id, 0, "t", &[]).unwrap().record.seq
                })
            })
            .collect();
        let mut seqs: Vec<u64> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        seqs.sort();
        assert_eq!(seqs, (1..=8).collect::<Vec<_>>());
    }
}
