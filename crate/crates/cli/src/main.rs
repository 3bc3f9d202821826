use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    match dfq_cli::run(std::env::args_os()) {
        Ok(Some(text)) => {
            let mut stdout = std::io::stdout().lock();
            if stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .is_err()
            {
                return ExitCode::FAILURE;
            }
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(err) => {
            // Help and version requests come through clap's error path.
            if let Some(clap_err) = err.downcast_ref::<clap::Error>() {
                if !clap_err.use_stderr() {
                    print!("{clap_err}");
                    return ExitCode::SUCCESS;
                }
                let first = clap_err.to_string();
                eprintln!("{}", first.lines().next().unwrap_or("invalid arguments"));
                return ExitCode::from(2);
            }
            let chain: Vec<String> = err.chain().map(|e| e.to_string()).collect();
            eprintln!("error: {}", chain.join(": "));
            ExitCode::FAILURE
        }
    }
}
