available = {
    # 'name': ('module','class','mode'),
    '.spheromesh': ('spheromesh', 'Spheromesh', 'rw'),  # mesh dump
    '.spheronoise': ('spheronoise', 'Spheronoise', 'rw'),  # noise basis
    '.state': ('state', 'Spherostate', 'rw'),  # model state
    '.snapshot': ('snapshot', 'Snapshot', 'rw'),  # lat-lon text matrix
    '.parquet': ('snapshot', 'SnapshotParquet', 'rw'),  # lat-lon binary twin
    '.csv': ('diagnostics', 'DiagnosticsFile', 'rw'),  # diagnostics series
    '.yaml': ('yaml', 'Yaml', 'rw'),  # run configuration
    '.yml': ('yaml', 'Yaml', 'rw'),  # run configuration
}
