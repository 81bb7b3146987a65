use std::io::{BufReader, BufWriter, Write};
use std::net::{Shutdown, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use super::{frame_len, read_frame, write_frame, Channel, ChannelStats, MsgType, TransportError};

/// Framed channel over a TCP stream.
pub struct TcpChannel {
    reader: Mutex<BufReader<TcpStream>>,
    writer: Mutex<BufWriter<TcpStream>>,
    stream: TcpStream,
    sent: AtomicU64,
    sent_bytes: AtomicU64,
    received: AtomicU64,
    received_bytes: AtomicU64,
}

impl TcpChannel {
    pub fn from_stream(stream: TcpStream) -> Result<Self, TransportError> {
        stream.set_nodelay(true)?;
        Ok(TcpChannel {
            reader: Mutex::new(BufReader::new(stream.try_clone()?)),
            writer: Mutex::new(BufWriter::new(stream.try_clone()?)),
            stream,
            sent: AtomicU64::new(0),
            sent_bytes: AtomicU64::new(0),
            received: AtomicU64::new(0),
            received_bytes: AtomicU64::new(0),
        })
    }

    /// Connects, retrying for up to `wait` while the peer starts listening.
    pub fn connect<A: ToSocketAddrs + Clone>(addr: A, wait: Duration) -> Result<Self, TransportError> {
        let start = std::time::Instant::now();
        loop {
            match TcpStream::connect(addr.clone()) {
                Ok(s) => return Self::from_stream(s),
                Err(_) if start.elapsed() < wait => std::thread::sleep(Duration::from_millis(50)),
                Err(e) => return Err(e.into()),
            }
        }
    }

    /// Accepts exactly one connection.
    pub fn accept(listener: &TcpListener) -> Result<Self, TransportError> {
        let (s, _) = listener.accept()?;
        Self::from_stream(s)
    }

    pub fn set_timeout(&self, timeout: Option<Duration>) -> Result<(), TransportError> {
        self.stream.set_read_timeout(timeout)?;
        Ok(())
    }
}

impl Channel for TcpChannel {
    fn send(&self, msg_type: MsgType, payload: &[u8]) -> Result<(), TransportError> {
        let mut w = self.writer.lock().expect("writer lock poisoned");
        write_frame(&mut *w, msg_type, payload)?;
        w.flush()?;
        self.sent.fetch_add(1, Ordering::Relaxed);
        self.sent_bytes
            .fetch_add(frame_len(payload.len()), Ordering::Relaxed);
        Ok(())
    }

    fn recv(&self, expected: MsgType) -> Result<Vec<u8>, TransportError> {
        let mut r = self.reader.lock().expect("reader lock poisoned");
        let (got, payload) = read_frame(&mut *r).map_err(|e| match e {
            TransportError::Io(io)
                if matches!(io.kind(), std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut) =>
            {
                TransportError::Timeout(expected)
            }
            other => other,
        })?;
        self.received.fetch_add(1, Ordering::Relaxed);
        self.received_bytes
            .fetch_add(frame_len(payload.len()), Ordering::Relaxed);
        if got != expected {
            return Err(TransportError::UnexpectedType { expected, got });
        }
        Ok(payload)
    }

    fn close(&self) {
        let _ = self.stream.shutdown(Shutdown::Both);
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
    fn loopback_round_trip_and_close() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let t = std::thread::spawn(move || {
            let c = TcpChannel::connect(addr, Duration::from_secs(5)).unwrap();
            c.send(MsgType::LaandU, &[1, 2, 3]).unwrap();
            let got = c.recv(MsgType::LaandD).unwrap();
            c.close();
            got
        });
        let s = TcpChannel::accept(&listener).unwrap();
        assert_eq!(s.recv(MsgType::LaandU).unwrap(), vec![1, 2, 3]);
        s.send(MsgType::LaandD, &[9]).unwrap();
        assert_eq!(t.join().unwrap(), vec![9]);
        assert!(matches!(s.recv(MsgType::LaandU), Err(TransportError::Closed)));
        assert_eq!(s.stats().bytes_sent, 6);
    }

    #[test]
    fn read_timeout_is_reported() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let _peer = TcpStream::connect(addr).unwrap();
        let s = TcpChannel::accept(&listener).unwrap();
        s.set_timeout(Some(Duration::from_millis(30))).unwrap();
        assert!(matches!(s.recv(MsgType::Hello), Err(TransportError::Timeout(_))));
    }
}
