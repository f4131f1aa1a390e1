"""應用層：stderr logging 設定與每次執行的容器組裝（create_app）"""
