use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::sync::Mutex;
use std::time::Duration;

use super::{frame_len, Channel, ChannelStats, MsgType, TransportError, MAX_PAYLOAD};

type Frame = (MsgType, Vec<u8>);

/// One end of an in-process channel pair.
pub struct MemoryChannel {
    tx: Mutex<Option<Sender<Frame>>>,
    rx: Mutex<Receiver<Frame>>,
    closed: AtomicBool,
    timeout: Option<Duration>,
    sent: AtomicU64,
    sent_bytes: AtomicU64,
    received: AtomicU64,
    received_bytes: AtomicU64,
}

/// Creates two connected endpoints.
pub fn memory_pair() -> (MemoryChannel, MemoryChannel) {
    let (tx_a, rx_b) = mpsc::channel();
    let (tx_b, rx_a) = mpsc::channel();
    (MemoryChannel::new(tx_a, rx_a), MemoryChannel::new(tx_b, rx_b))
}

impl MemoryChannel {
    fn new(tx: Sender<Frame>, rx: Receiver<Frame>) -> Self {
        MemoryChannel {
            tx: Mutex::new(Some(tx)),
            rx: Mutex::new(rx),
            closed: AtomicBool::new(false),
            timeout: None,
            sent: AtomicU64::new(0),
            sent_bytes: AtomicU64::new(0),
            received: AtomicU64::new(0),
            received_bytes: AtomicU64::new(0),
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = Some(timeout);
        self
    }
}

impl Channel for MemoryChannel {
    fn send(&self, msg_type: MsgType, payload: &[u8]) -> Result<(), TransportError> {
        if payload.len() > MAX_PAYLOAD {
            return Err(TransportError::FrameTooLarge(payload.len()));
        }
        let guard = self.tx.lock().expect("sender lock poisoned");
        let tx = guard.as_ref().ok_or(TransportError::Closed)?;
        tx.send((msg_type, payload.to_vec()))
            .map_err(|_| TransportError::Closed)?;
        self.sent.fetch_add(1, Ordering::Relaxed);
        self.sent_bytes
            .fetch_add(frame_len(payload.len()), Ordering::Relaxed);
        Ok(())
    }

    fn recv(&self, expected: MsgType) -> Result<Vec<u8>, TransportError> {
        if self.closed.load(Ordering::Relaxed) {
            return Err(TransportError::Closed);
        }
        let rx = self.rx.lock().expect("receiver lock poisoned");
        let (got, payload) = match self.timeout {
            None => rx.recv().map_err(|_| TransportError::Closed)?,
            Some(t) => rx.recv_timeout(t).map_err(|e| match e {
                RecvTimeoutError::Timeout => TransportError::Timeout(expected),
                RecvTimeoutError::Disconnected => TransportError::Closed,
            })?,
        };
        self.received.fetch_add(1, Ordering::Relaxed);
        self.received_bytes
            .fetch_add(frame_len(payload.len()), Ordering::Relaxed);
        if got != expected {
            return Err(TransportError::UnexpectedType { expected, got });
        }
        Ok(payload)
    }

    fn close(&self) {
        self.closed.store(true, Ordering::Relaxed);
        self.tx.lock().expect("sender lock poisoned").take();
    }

    fn stats(&self) -> ChannelStats {
        ChannelStats {
            messages_sent: self.sent.load(Ordering::Relaxed),
            bytes_sent: self.sent_bytes.load(Ordering::Relaxed),
            messages_received: self.received.load(Ordering::Relaxed),
            bytes_received: self.received_bytes.load(Ordering::Relaxed),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn messages_arrive_in_order_with_counters() {
        let (a, b) = memory_pair();
        for i in 0..100u8 {
            a.send(MsgType::CombD, &[i]).unwrap();
        }
        for i in 0..100u8 {
            assert_eq!(b.recv(MsgType::CombD).unwrap(), vec![i]);
        }
        assert_eq!(a.stats().bytes_sent, 600);
        assert_eq!(b.stats().bytes_received, 600);
    }

    #[test]
    fn wrong_type_is_reported() {
        let (a, b) = memory_pair();
        a.send(MsgType::LaotX0, &[]).unwrap();
        assert!(matches!(
            b.recv(MsgType::LaotX1),
            Err(TransportError::UnexpectedType { expected: MsgType::LaotX1, got: MsgType::LaotX0 })
        ));
    }

    #[test]
    fn send_after_close_fails_and_peer_sees_closed() {
        let (a, b) = memory_pair();
        a.close();
        assert!(matches!(a.send(MsgType::Hello, &[]), Err(TransportError::Closed)));
        assert!(matches!(b.recv(MsgType::Hello), Err(TransportError::Closed)));
    }

    #[test]
    fn recv_times_out() {
        let (a, _b) = memory_pair();
        let a = a.with_timeout(Duration::from_millis(20));
        assert!(matches!(a.recv(MsgType::Hello), Err(TransportError::Timeout(MsgType::Hello))));
    }

    #[test]
    fn full_duplex_from_two_threads() {
        let (a, b) = memory_pair();
        std::thread::scope(|s| {
            s.spawn(|| {
                for i in 0..1000u32 {
                    a.send(MsgType::CombD, &i.to_be_bytes()).unwrap();
                }
            });
            s.spawn(|| {
                for i in 0..1000u32 {
                    b.send(MsgType::CombD, &i.to_be_bytes()).unwrap();
                }
            });
            s.spawn(|| {
                for i in 0..1000u32 {
                    assert_eq!(a.recv(MsgType::CombD).unwrap(), i.to_be_bytes());
                }
            });
            for i in 0..1000u32 {
                assert_eq!(b.recv(MsgType::CombD).unwrap(), i.to_be_bytes());
            }
        });
    }
}
