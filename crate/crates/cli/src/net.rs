use std::net::TcpListener;
use std::time::Duration;

use clap::Args;
use tinyot::transport::TcpChannel;
use tinyot::Role;

use crate::{CliError, CliResult};

#[derive(Args, Debug)]
pub struct NetArgs {
    /// Listen on this address and accept one peer.
    #[arg(long, conflicts_with_all = ["connect", "peer"])]
    listen: Option<String>,
    /// Connect to a listening peer.
    #[arg(long, conflicts_with = "peer")]
    connect: Option<String>,
    /// Peer address: alice listens on it, bob connects to it.
    #[arg(long)]
    peer: Option<String>,
    /// Seconds to keep retrying a connect.
    #[arg(long, env = "TINYOT_CONNECT_WAIT", default_value_t = 30)]
    wait: u64,
}

impl NetArgs {
    pub fn open(&self, role: Role) -> CliResult<TcpChannel> {
        let wait = Duration::from_secs(self.wait);
        let connect = |addr: &str| TcpChannel::connect(addr, wait).map_err(|e| CliError::Core(e.into()));
        match (&self.listen, &self.connect, &self.peer) {
            (Some(addr), _, _) => listen(addr),
            (_, Some(addr), _) => connect(addr),
            (_, _, Some(addr)) if role == Role::Alice => listen(addr),
            (_, _, Some(addr)) => connect(addr),
            _ => Err(CliError::Usage("one of --listen, --connect or --peer is required".into())),
        }
    }
}

fn listen(addr: &str) -> CliResult<TcpChannel> {
    let listener = TcpListener::bind(addr)?;
    eprintln!("listening on {}", listener.local_addr()?);
    TcpChannel::accept(&listener).map_err(|e| CliError::Core(e.into()))
}
