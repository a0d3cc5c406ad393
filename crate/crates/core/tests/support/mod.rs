pub mod alarm_oracle;
