# Services Package